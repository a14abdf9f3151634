"""Egalitarian budget division: voting rules, fairness axioms and price of fairness."""
