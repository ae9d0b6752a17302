"""Random valid rule bases for property and acceptance suites."""
import random

from rulemc.rulebase import And, Lit, Literal, Or, Rule, RuleBase


def random_formula(rng, n, depth=2):
    if depth == 0 or rng.random() < 0.45:
        return Lit(Literal(rng.randrange(n), rng.random() < 0.3))
    node = And if rng.random() < 0.5 else Or
    return node(random_formula(rng, n, depth - 1), random_formula(rng, n, depth - 1))


def random_rule_base(rng, max_rules, max_props):
    m = rng.randint(1, max_rules)
    n = rng.randint(1, max_props)
    rules = []
    for i in range(m):
        lhs = random_formula(rng, n)
        size = rng.randint(1, min(3, n))
        rhs = tuple(Literal(k, rng.random() < 0.35) for k in rng.sample(range(n), size))
        rules.append(Rule(i, f"r{i}", lhs, rhs))
    return RuleBase.from_rules(rules)


def rule_bases(seed, count, max_rules, max_props):
    rng = random.Random(seed)
    return [random_rule_base(rng, max_rules, max_props) for _ in range(count)]
