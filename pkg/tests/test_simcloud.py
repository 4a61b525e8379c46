import json
from fractions import Fraction

import pytest

from lsscontract import access
from lsscontract.msp import Msp, msp_to_dict
from lsscontract.simcloud import (
    SWEEP_CSV_FIELDS,
    Event,
    Scenario,
    ScenarioError,
    load_scenario,
    run,
    sweep_fig1,
    sweep_to_csv,
    sweep_to_gnuplot,
)

from conftest import TOY_ROWS


def removal_scenario(method, removed, query, z=10**6, mode="analytic", seed=7):
    return Scenario(
        n=10, t=8, seed=seed, z=z, mode=mode,
        events=(
            Event("distribute"),
            Event("remove", frozenset(removed), method),
            Event("reconstruct", frozenset(query)),
            Event("snapshot", label="after"),
        ),
    )


class TestRun:
    def test_lc_six_survivors_reconstruct(self):
        rep = run(removal_scenario("lc", {9, 10}, range(1, 7)))
        assert rep.reconstructions[0].ok and rep.reconstructions[0].value == rep.reconstructions[0].expected

    def test_lc_five_survivors_refused(self):
        rep = run(removal_scenario("lc", {9, 10}, range(1, 6)))
        res = rep.reconstructions[0]
        assert not res.ok and res.reason == "unauthorized set"

    def test_no_removal_eight_servers(self):
        sc = Scenario(n=10, t=8, seed=1, z=1, events=(Event("distribute"), Event("reconstruct", frozenset(range(3, 11)))))
        res = run(sc).reconstructions[0]
        assert res.ok and res.value == res.expected

    @pytest.mark.parametrize("method", ["ps", "is", "cs"])
    def test_other_methods_reconstruct(self, method):
        rep = run(removal_scenario(method, {2, 5}, {1, 3, 4, 6, 7, 8}))
        assert rep.reconstructions[0].ok

    def test_deterministic(self):
        sc = removal_scenario("cs", {1, 2, 3}, {4, 5, 6, 7, 8}, z=50, mode="material")
        assert run(sc).to_csv() == run(sc).to_csv()

    def test_storage_conservation_lc(self):
        rep = run(removal_scenario("lc", {4, 6, 8}, {1, 2, 3, 5, 7}, z=1))
        assert rep.snapshots[0].metrics.elements_per_secret == 7

    def test_linear_in_z(self):
        big = run(removal_scenario("is", {9, 10}, {1}, z=1000, mode="material")).snapshots[0].metrics
        small = run(removal_scenario("is", {9, 10}, {1}, z=10, mode="material")).snapshots[0].metrics
        analytic = run(removal_scenario("is", {9, 10}, {1}, z=1000)).snapshots[0].metrics
        assert big.total_bits == 100 * small.total_bits == analytic.total_bits

    def test_analytic_and_material_agree_on_values(self):
        a = run(removal_scenario("lc", {1}, range(2, 9), z=20, mode="material", seed=3))
        b = run(removal_scenario("lc", {1}, range(2, 9), z=20, mode="analytic", seed=3))
        assert a.reconstructions == b.reconstructions

    def test_chained_removals(self):
        sc = Scenario(n=10, t=8, seed=2, z=1, events=(
            Event("distribute"),
            Event("remove", frozenset({10}), "lc"),
            Event("remove", frozenset({1, 2}), "lc"),
            Event("reconstruct", frozenset({3, 4, 5, 6, 7})),
            Event("remove", frozenset({3}), "ps"),
            Event("reconstruct", frozenset({4, 5, 6, 7})),
            Event("reconstruct", frozenset({4, 5, 6})),
            Event("snapshot"),
        ))
        rep = run(sc)
        assert [r.ok for r in rep.reconstructions] == [True, True, False]
        assert rep.snapshots[0].metrics.elements_per_secret == 7
        assert rep.snapshots[0].methods == ("lc", "lc", "ps")

    def test_transfers(self):
        rep = run(removal_scenario("ps", {9, 10}, {1}, z=100))
        t = rep.transfers[0]
        assert t.elements == 2 and t.bits == 2 * 16 * 100

    def test_general_structure(self):
        gamma = access.AccessStructure(4, [{1, 2, 4}, {1, 3, 4}])
        sc = Scenario(n=4, p=2, seed=0, z=4, mode="material", msp=Msp.from_rows(2, TOY_ROWS),
                      structure=gamma, events=(
                          Event("distribute"), Event("remove", frozenset({4}), "cs"),
                          Event("reconstruct", frozenset({1, 2}), secret=3),
                          Event("reconstruct", frozenset({2, 3}), secret=3),
                          Event("snapshot")))
        rep = run(sc)
        assert [r.ok for r in rep.reconstructions] == [True, False]
        assert rep.snapshots[0].metrics.rho == Fraction(1, 2)


class TestValidation:
    def test_authorized_removal(self):
        with pytest.raises(ScenarioError, match="authorized"):
            run(removal_scenario("lc", set(range(1, 9)), {9}))

    def test_cumulative_authorized(self):
        sc = Scenario(n=4, t=2, p=7, seed=0, events=(
            Event("distribute"), Event("remove", frozenset({1}), "lc"), Event("remove", frozenset({2}), "lc")))
        with pytest.raises(ScenarioError):
            run(sc)

    def test_dead_server_query(self):
        with pytest.raises(ScenarioError, match="not live"):
            run(removal_scenario("lc", {9, 10}, {1, 9}))

    def test_lc_after_copy_method(self):
        sc = Scenario(n=10, t=8, seed=0, events=(
            Event("distribute"), Event("remove", frozenset({1}), "is"), Event("remove", frozenset({2}), "lc")))
        with pytest.raises(ScenarioError, match="lc"):
            run(sc)

    def test_remove_before_distribute(self):
        with pytest.raises(ScenarioError):
            run(Scenario(n=10, t=8, seed=0, events=(Event("remove", frozenset({1}), "lc"),)))

    def test_unknown_method(self):
        with pytest.raises(ScenarioError):
            run(removal_scenario("xx", {1}, {2}))


class TestSweep:
    def test_shape_and_header(self):
        rows = sweep_fig1()
        assert len(rows) == 32
        assert sweep_to_csv(rows).splitlines()[0] == ",".join(SWEEP_CSV_FIELDS)

    def test_known_rows(self):
        rows = {(r["method"], r["m"]): r for r in sweep_fig1()}
        assert rows[("lc", 0)]["L_MiB"] == "19.0735" and rows[("lc", 0)]["rho"] == "1"
        assert rows[("is", 7)]["L_bits"] == 384_000_000
        assert rows[("is", 7)]["L_MiB"] == "45.7764" and rows[("is", 7)]["rho"] == "1/8"
        assert all(rows[("ps", m)]["L_MiB"] == "19.0735" for m in range(8))

    def test_lc_column(self):
        for r in sweep_fig1(methods=("lc",)):
            assert r["L_bits"] == (10 - r["m"]) * 16 * 10**6

    def test_gnuplot(self):
        text = sweep_to_gnuplot(sweep_fig1())
        blocks = [b for b in text.split("\n\n\n") if b.strip()]
        assert len(blocks) == 2
        assert blocks[0].splitlines()[2].split() == ["0", "19.0735", "19.0735", "19.0735", "19.0735"]


class TestScenarioDocuments:
    def test_load(self):
        doc = {
            "n": 10, "t": 8, "seed": 4, "z": 10,
            "events": [
                {"kind": "distribute"},
                {"kind": "remove", "servers": [9, 10], "method": "lc"},
                {"kind": "reconstruct", "servers": [1, 2, 3, 4, 5, 6], "secret": 3},
                {"kind": "snapshot", "label": "end"},
            ],
        }
        rep = run(load_scenario(json.dumps(doc)))
        assert rep.reconstructions[0].ok and rep.snapshots[0].label == "end"

    def test_with_msp_and_structure(self):
        doc = {"n": 4, "modulus": 2, "seed": 0, "msp": msp_to_dict(Msp.from_rows(2, TOY_ROWS)),
               "structure": "n=4; basis={1,2,4},{1,3,4}", "events": [{"kind": "distribute"}]}
        sc = load_scenario(json.dumps(doc))
        assert sc.access_structure().n == 4

    def test_seed_required(self):
        with pytest.raises(ScenarioError):
            load_scenario('{"n": 3, "t": 2}')

    def test_parse_error(self):
        with pytest.raises(ScenarioError, match="line 1"):
            load_scenario('{"n": 3,,}')
