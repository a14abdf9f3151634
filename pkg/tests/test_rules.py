import numpy as np
import pytest
from _cases import instance, random_instances

from egalbudget import core
from egalbudget.core import CapExceededError
from egalbudget.rules import (
    RP_MAX_N,
    RULES,
    Rule,
    cut_rule,
    egal_rule,
    es_rule,
    pv_rule,
    rp_rule,
    run_rule,
    util_rule,
)
from egalbudget.solver import optimal_egalitarian

ALL = list(random_instances(51, 40, max_n=6, max_m=6))


@pytest.mark.parametrize("inst", ALL, ids=repr)
@pytest.mark.parametrize("rule", list(Rule))
def test_outputs_are_distributions(rule, inst):
    x = run_rule(rule, inst)
    assert x.shape == (inst.m,)
    assert x.min() >= 0
    assert x.sum() == pytest.approx(1.0, abs=1e-12)


def test_dispatch_by_name():
    inst = core.ufs_gap_instance(3)
    np.testing.assert_allclose(run_rule("util", inst), util_rule(inst))
    assert set(RULES) == set(Rule)
    with pytest.raises(ValueError):
        run_rule("borda", inst)


class TestUtil:
    def test_single_winner(self):
        np.testing.assert_allclose(util_rule(core.ufs_gap_instance(5)), [1, 0])

    def test_ties_split_uniformly(self):
        np.testing.assert_allclose(util_rule(instance(3, [0, 1], [1, 2], [0, 2])), [1 / 3] * 3)

    @pytest.mark.parametrize("inst", ALL, ids=repr)
    def test_maximizes_total_utility(self, inst):
        assert (inst.incidence @ util_rule(inst)).sum() == pytest.approx(inst.scores.max())


class TestCut:
    def test_hand_example(self):
        # scores (2, 2, 1): agent 0 splits over its tie, agent 1 skips project 2
        inst = instance(3, [0, 1], [0, 2], [1])
        np.testing.assert_allclose(cut_rule(inst), [0.5, 0.5, 0.0])

    @pytest.mark.parametrize("n", range(4, 9))
    def test_cut_family(self, n):
        inst = core.cut_instance(n)
        x = cut_rule(inst)
        # every agent spends on the common project m-1 (score n-1)
        assert x[-1] == pytest.approx((n - 1) / n)
        assert core.egalitarian_welfare(inst, x) == pytest.approx(1 / n, abs=1e-12)


class TestProportional:
    def test_pv(self):
        inst = core.pv_instance(4, 3)
        np.testing.assert_allclose(pv_rule(inst), [3 / 7, 3 / 7, 1 / 7])

    def test_es(self):
        inst = instance(3, [0], [0, 1, 2])
        np.testing.assert_allclose(es_rule(inst), [2 / 3, 1 / 6, 1 / 6])

    @pytest.mark.parametrize("inst", ALL, ids=repr)
    def test_es_gives_everyone_a_share(self, inst):
        assert (inst.incidence @ es_rule(inst)).min() >= 1 / inst.n - 1e-12


@pytest.mark.parametrize("inst", ALL, ids=repr)
def test_egal_is_optimal(inst):
    _, sw = optimal_egalitarian(inst)
    assert core.egalitarian_welfare(inst, egal_rule(inst)) == pytest.approx(sw, abs=1e-9)


class TestRandomPriority:
    @pytest.mark.parametrize("n", range(2, RP_MAX_N + 1))
    def test_ufs_gap(self, n):
        x = rp_rule(core.ufs_gap_instance(n))
        np.testing.assert_allclose(x, [1 - 1 / n, 1 / n], atol=1e-12)

    @pytest.mark.parametrize("inst", list(random_instances(52, 30, max_n=5, max_m=5)), ids=repr)
    def test_prune_matches_full_enumeration(self, inst):
        fast = inst.incidence @ rp_rule(inst)
        slow = inst.incidence @ rp_rule(inst, prune=False)
        np.testing.assert_allclose(fast, slow, atol=1e-9)

    @pytest.mark.parametrize("inst", list(random_instances(53, 15, max_n=5, max_m=5)), ids=repr)
    def test_anonymous(self, inst):
        rng = np.random.default_rng(inst.n * 7 + inst.m)
        order = rng.permutation(inst.n)
        base = inst.incidence @ rp_rule(inst)
        other = inst.permuted(order)
        np.testing.assert_allclose(other.incidence @ rp_rule(other), base[order], atol=1e-9)

    def test_cap(self):
        with pytest.raises(CapExceededError):
            rp_rule(core.ufs_gap_instance(RP_MAX_N + 1))
        x = rp_rule(core.ufs_gap_instance(RP_MAX_N + 1), max_n=RP_MAX_N + 1)
        assert x[1] == pytest.approx(1 / (RP_MAX_N + 1))

    def test_two_blocks(self):
        # the first agent's project takes everything, and half the orderings start in each block
        inst = instance(2, [0], [0], [1], [1])
        np.testing.assert_allclose(rp_rule(inst), [0.5, 0.5])

    def test_disjoint_singletons(self):
        inst = instance(4, *[[j] for j in range(4)])
        np.testing.assert_allclose(rp_rule(inst), [0.25] * 4)


@pytest.mark.parametrize("inst", ALL[:20], ids=repr)
@pytest.mark.parametrize("rule", [Rule.PV, Rule.ES, Rule.UTIL, Rule.CUT])
def test_anonymous_and_neutral(rule, inst):
    rng = np.random.default_rng(inst.n + 10 * inst.m)
    agents, projects = rng.permutation(inst.n), rng.permutation(inst.m)
    x = run_rule(rule, inst)
    y = run_rule(rule, inst.permuted(agents, projects))
    np.testing.assert_allclose(y[projects], x, atol=1e-12)
