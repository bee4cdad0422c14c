import json
from fractions import Fraction

import pytest

from mkpsim import (
    GenParams,
    Instance,
    SweepParams,
    audit_max_capacity_dispatch,
    gen_adversarial,
    gen_random,
    instance_digest,
    run_algorithm,
    run_experiment,
    verify_instance,
    verify_sweep,
)
from mkpsim.harness import CSV_COLUMNS, make_report, report_to_json, reports_to_csv
from mkpsim.simnet import SOURCE, Delivery, Winner

GOLDEN_DIGEST_M10_N3_SEED42 = (
    "a47136d6d9edfef75e24ae81354257895c9eabf7c1c70aa941eb65396751a967"
)


class TestGenRandom:
    def test_same_params_same_instance(self):
        params = GenParams(6, 2, 50, 50, 1, 100, seed=7)
        assert gen_random(params) == gen_random(params)

    def test_empty_item_list(self):
        inst = gen_random(GenParams(0, 1, 50, 50, 1, 100, seed=1))
        assert inst.m == 0 and inst.n == 1

    def test_golden_digest_is_pinned(self):
        inst = gen_random(GenParams(10, 3, 50, 50, 1, 100, seed=42))
        assert instance_digest(inst) == GOLDEN_DIGEST_M10_N3_SEED42

    def test_values_respect_the_ranges(self):
        inst = gen_random(GenParams(40, 5, 9, 4, 2, 6, seed=3))
        assert all(1 <= it.cost <= 9 and 1 <= it.weight <= 4 for it in inst.items)
        assert all(2 <= W <= 6 for W in inst.capacities)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(m=-1, n=1),
            dict(m=1, n=0),
            dict(m=1, n=1, cost_max=0),
            dict(m=1, n=1, weight_max=0),
            dict(m=1, n=1, cap_min=0),
            dict(m=1, n=1, cap_min=5, cap_max=4),
        ],
    )
    def test_bad_params_rejected(self, kwargs):
        defaults = dict(m=1, n=1, cost_max=50, weight_max=50, cap_min=1, cap_max=100, seed=0)
        defaults.update(kwargs)
        with pytest.raises(ValueError):
            GenParams(**defaults)


class TestGenAdversarial:
    def test_n2_w10_layout(self):
        inst = gen_adversarial(2, 10)
        assert inst.capacities == (10, 10)
        assert [(it.cost, it.weight) for it in inst.items] == [
            (2, 1),
            (2, 1),
            (10, 10),
            (10, 10),
        ]

    def test_smallest_legal_family(self):
        inst = gen_adversarial(1, 3)
        assert inst.capacities == (3,)
        assert [(it.cost, it.weight) for it in inst.items] == [(2, 1), (3, 3)]

    def test_w_below_three_rejected_with_explanation(self):
        with pytest.raises(ValueError, match="W must be >= 3"):
            gen_adversarial(2, 2)

    def test_n_zero_rejected(self):
        with pytest.raises(ValueError):
            gen_adversarial(0, 10)


class TestRunExperiment:
    def test_family_ratios(self):
        fam = gen_adversarial(2, 10)
        reports = run_experiment(fam, algorithms=("simple", "modified"), with_oracle=True)
        assert [r.algorithm for r in reports] == ["simple", "modified"]
        assert reports[0].ratio == Fraction(1, 5)
        assert reports[1].ratio == Fraction(1)
        assert reports[0].bound_ok is False and reports[1].bound_ok is True

    def test_empty_instance_all_algorithms(self):
        reports = run_experiment(Instance.from_pairs([], [5]), with_oracle=True)
        assert [r.profit for r in reports] == [0, 0, 0, 0]
        assert all(r.opt == 0 for r in reports)

    def test_instance_a_dist_and_tree(self, instance_a):
        reports = run_experiment(instance_a, algorithms=("dist", "tree"))
        assert [r.algorithm for r in reports] == ["dist", "tree"]
        assert reports[0].profit == reports[1].profit == 18
        assert reports[0].messages == reports[1].messages == 20
        assert reports[0].phases == 13 and reports[1].phases == 16

    def test_report_order_is_fixed_regardless_of_request_order(self, instance_a):
        reports = run_experiment(instance_a, algorithms=("tree", "simple"))
        assert [r.algorithm for r in reports] == ["simple", "tree"]

    def test_unknown_algorithm_rejected(self, instance_a):
        with pytest.raises(ValueError):
            run_experiment(instance_a, algorithms=("simple", "bogus"))


class TestReports:
    def test_json_field_order_and_content(self, instance_a):
        report = run_experiment(instance_a, algorithms=("dist",), with_oracle=True)[0]
        text = report_to_json(report)
        doc = json.loads(text)
        assert list(doc) == [
            "algorithm",
            "instance",
            "m",
            "n",
            "profit",
            "placement",
            "messages",
            "phases",
            "rounds",
            "opt",
            "ratio",
            "bound_ok",
        ]
        assert doc["placement"] == {"0": 0, "1": None, "2": 1, "3": 0}
        assert doc["opt"] == 21 and doc["ratio"] == "6/7" and doc["bound_ok"] is True
        assert text == report_to_json(report)  # byte-stable

    def test_json_without_oracle_omits_comparison_fields(self, instance_a):
        report = run_experiment(instance_a, algorithms=("simple",))[0]
        doc = json.loads(report_to_json(report))
        assert "opt" not in doc and "ratio" not in doc and "bound_ok" not in doc

    def test_unavailable_oracle_is_spelled_out(self, instance_a):
        result = run_algorithm("simple", instance_a)
        report = make_report(instance_a, result, None, "unavailable")
        doc = json.loads(report_to_json(report))
        assert doc["opt"] == "unavailable"
        assert "ratio" not in doc and "bound_ok" not in doc

    def test_csv_export(self, instance_a):
        reports = run_experiment(instance_a, with_oracle=True)
        text = reports_to_csv(reports)
        lines = text.splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert lines[1] == "simple,4,2,14,21,2,3,8,4,2"
        assert lines[3] == "dist,4,2,18,21,6,7,20,13,4"

    def test_csv_blanks_without_oracle(self, instance_a):
        text = reports_to_csv(run_experiment(instance_a, algorithms=("simple",)))
        assert text.splitlines()[1] == "simple,4,2,14,,,,8,4,2"


class TestTraceAudit:
    def test_clean_runs_pass(self, instance_a):
        for name in ("dist", "tree"):
            run = run_algorithm(name, instance_a)
            assert audit_max_capacity_dispatch(instance_a, run.trace, name) == []

    def test_tampered_winner_is_caught(self, instance_a):
        run = run_algorithm("dist", instance_a)
        tampered = tuple(
            Delivery(d.phase, 2, d.recipient, Winner(2))
            if d.recipient == SOURCE and isinstance(d.payload, Winner) and d.phase == 3
            else d
            for d in run.trace
        )
        problems = audit_max_capacity_dispatch(instance_a, tampered, "dist")
        assert problems and "round 0" in problems[0]

    def test_fabricated_extra_winner_is_caught(self, instance_a):
        run = run_algorithm("dist", instance_a)
        extra = run.trace + (Delivery(3, 2, SOURCE, Winner(2)),)
        problems = audit_max_capacity_dispatch(instance_a, extra, "dist")
        assert problems == ["round 0: more than one winner report"]

    def test_unknown_algorithm_rejected(self, instance_a):
        with pytest.raises(ValueError):
            audit_max_capacity_dispatch(instance_a, (), "simple")


class TestVerification:
    def test_instance_a_passes_everything(self, instance_a):
        verdict = verify_instance(instance_a)
        assert verdict.ok, verdict.violations
        assert verdict.opt.opt == 21

    def test_family_passes_everything(self):
        verdict = verify_instance(gen_adversarial(4, 10))
        assert verdict.ok, verdict.violations

    def test_small_sweep_is_clean(self):
        summary = verify_sweep(SweepParams(0, 4, 1, 3, seeds=3))
        assert summary.instances == 45
        assert summary.ok

    def test_sweep_param_validation(self):
        with pytest.raises(ValueError):
            SweepParams(3, 2, 1, 1, seeds=1)
        with pytest.raises(ValueError):
            SweepParams(1, 2, 0, 1, seeds=1)
        with pytest.raises(ValueError):
            SweepParams(1, 2, 1, 1, seeds=0)

    def test_sweep_grid_is_deterministic(self):
        params = SweepParams(1, 2, 1, 2, seeds=2)
        assert list(params.grid()) == list(params.grid())

    def test_violations_surface_instead_of_silent_success(self, instance_a, monkeypatch):
        import mkpsim.harness as harness
        from mkpsim.oracle import OptimalSolution

        fake = OptimalSolution(None, 10**9, 0)  # impossible optimum
        monkeypatch.setattr(harness, "exact_optimum", lambda inst, **kw: fake)
        verdict = verify_instance(instance_a)
        assert not verdict.ok
        assert any("bound violated" in v for v in verdict.violations)

    def test_unavailable_oracle_blocks_success(self, instance_a, monkeypatch):
        import mkpsim.harness as harness

        monkeypatch.setattr(harness, "exact_optimum", lambda inst, **kw: None)
        verdict = verify_instance(instance_a)
        assert not verdict.ok
        assert any("oracle unavailable" in v for v in verdict.violations)
