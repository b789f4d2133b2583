"""Argument vectors covering every CLI subcommand, shared by the CLI tests."""

UNIT_SET = '{"intervals": [{"a": 0, "b": 1}], "points": [0.5]}'

CASES = {
    "example1": ["example1"],
    "pareto": ["pareto", "--h", "0.05"],
    "partition": ["partition", "--f1", "x", "--f2", "1 - x", "--f3", "0.6",
                  "--grid", "interval:0.05", "--random-checks", "200"],
    "decompose": ["decompose", "--function", '{"name": "sigma", "expr": "t1^2 + t2^3", '
                  '"values": [1, 2, 3]}', "--values", "1,2,3"],
    "integrate": ["integrate", "--set", UNIT_SET, "--f", "x^2", "--pieces", "",
                  "--mode", "eq2"],
    "limits": ["limits", "--universe", "4", "--sequence",
               '{"builder": "alternating", "A": ["w1"], "B": ["w1", "w2"]}'],
    "derivative": ["derivative", "--universe", "4", "--function", "measure_squared",
                   "--at", '["w1"]', "--sequence", '{"builder": "constant", "B": ["w2"]}'],
    "gamma": ["gamma", "--function", "measure_squared", "--universe", "4"],
}
