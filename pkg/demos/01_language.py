# Modeling language tour: parse, inspect, pretty-print.

# %%
from kmc import ParseError, ValidationError, format_model, parse_formula, parse_model

text = """
// a lossy channel watched by a detector with one tick of lag
agent Channel {
  var link : {ok, lost} init ok;
  rule true -> link := ok;
  rule true -> link := lost;
}

agent Detector {
  var seen : {ok, lost} init ok;
  rule true -> seen := Channel.link;
}

define alarm := Detector.seen = lost;

formula catches_up := AG(Channel.link = lost -> AX(alarm));
"""
m = parse_model(text)
print([a.name for a in m.agents], [v.qualified for v in m.variables])

# %%
# canonical form: comments dropped, minimal parentheses, stable bytes
print(format_model(m))

# %%
# defines expand in place, so formulas only ever mention variables
print(m.formula("catches_up"))

# %%
# precedence: arithmetic, comparison, not, and, or, then right-nested ->
print(parse_formula("not a = b and c or d -> e -> f"))

# %%
# errors carry a 1-based line:column span
for bad in ["agent A { var x : 0..10 init 11; }",
            "agent A { var x : 0..3 init 0; rule y = 1 -> x := 0; }",
            "agent A { var x : 0..3 init 0 }"]:
    try:
        parse_model(bad)
    except (ParseError, ValidationError) as err:
        print(type(err).__name__, err)
