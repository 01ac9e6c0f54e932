# test_cli.py

import json
from fractions import Fraction
from xml.sax.saxutils import unescape

import pytest

import runner
from conftest import MODELS

FIG1 = str(MODELS / "fig1.json")


def run(capsys, *argv):
    code = runner.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


class TestPrice:
    def test_worked_example(self, capsys):
        code, out, _ = run(capsys, "price", "--model", FIG1, "--currency", "2")
        assert code == 0
        assert out.splitlines()[0] == "bid 11/3 ask 14/3"
        assert out.splitlines()[1] == "≈ bid 3.666667 ask 4.666667"

    def test_single_side(self, capsys):
        code, out, _ = run(capsys, "price", "--model", FIG1, "--currency", "1", "--side", "ask")
        assert code == 0
        assert out.splitlines()[0] == "ask 7/15"

    def test_zero_payoff(self, capsys):
        code, out, _ = run(capsys, "price", "--model", str(MODELS / "zero_payoff.json"), "--currency", "2")
        assert code == 0
        assert out.splitlines()[0] == "bid 0/1 ask 0/1"

    def test_arbitrage_exit_code(self, capsys):
        code, _, err = run(capsys, "price", "--model", str(MODELS / "arbitrage.json"), "--currency", "2")
        assert code == 2
        assert "arbitrage" in err

    def test_bad_currency(self, capsys):
        code, _, err = run(capsys, "price", "--model", FIG1, "--currency", "3")
        assert code == 1
        assert "currency 3" in err

    def test_missing_option_is_malformed_input(self, capsys):
        with pytest.raises(SystemExit) as exc:
            runner.main(["price", "--model", FIG1])
        assert exc.value.code == 1
        assert "--currency" in capsys.readouterr().err

    def test_ill_typed_option(self, capsys):
        with pytest.raises(SystemExit) as exc:
            runner.main(["price", "--model", FIG1, "--currency", "two"])
        assert exc.value.code == 1

    def test_missing_model(self, capsys, tmp_path):
        code, _, err = run(capsys, "price", "--model", str(tmp_path / "nope.json"), "--currency", "2")
        assert code == 1
        assert err.startswith("❌")


class TestHedgeAndVerify:
    def test_seller_round_trip(self, capsys, tmp_path):
        recipe = tmp_path / "seller.json"
        code, out, _ = run(capsys, "hedge", "--model", FIG1, "--currency", "2", "--side", "seller",
                           "--out", str(recipe))
        assert code == 0
        assert "cancel 1/3 at u (t=1)" in out
        code, out, _ = run(capsys, "verify", "--model", FIG1, "--recipe", str(recipe))
        assert code == 0
        report = json.loads(out)
        assert report["passed"] is True
        assert report["opponents"] == 140
        assert report["schema"] == 1

    def test_buyer_instant_only(self, capsys, tmp_path):
        recipe = tmp_path / "buyer.json"
        assert runner.main(["hedge", "--model", FIG1, "--currency", "2", "--side", "buyer",
                            "--out", str(recipe)]) == 0
        capsys.readouterr()
        report_path = tmp_path / "report.json"
        code, _, _ = run(capsys, "verify", "--model", FIG1, "--recipe", str(recipe), "--instant-only",
                         "--out", str(report_path))
        assert code == 0
        assert json.loads(report_path.read_text())["opponents"] == 5

    def test_underfunded_recipe_fails(self, capsys, tmp_path):
        recipe = tmp_path / "seller.json"
        runner.main(["hedge", "--model", FIG1, "--currency", "2", "--side", "seller", "--out", str(recipe)])
        doc = json.loads(recipe.read_text())
        doc["backbone"]["initial"] = ["0/1", "4/1"]
        recipe.write_text(json.dumps(doc))
        capsys.readouterr()
        code, out, err = run(capsys, "verify", "--model", FIG1, "--recipe", str(recipe), "--grid", "2")
        assert code == 1
        assert json.loads(out)["passed"] is False
        assert "violations" in err

    def test_truncated_liquidation_is_rejected(self, capsys, tmp_path):
        recipe = tmp_path / "seller.json"
        runner.main(["hedge", "--model", FIG1, "--currency", "2", "--side", "seller", "--out", str(recipe)])
        doc = json.loads(recipe.read_text())
        entry = next(e for e in doc["first"] if e["node"] == "root")
        del entry["values"]["u"]
        recipe.write_text(json.dumps(doc))
        capsys.readouterr()
        code, _, err = run(capsys, "verify", "--model", FIG1, "--recipe", str(recipe), "--grid", "2")
        assert code == 1
        assert "first liquidation from 'root' has no holding at ['u']" in err

    def test_infeasible_initial(self, capsys, tmp_path):
        code, _, err = run(capsys, "hedge", "--model", FIG1, "--currency", "2", "--side", "seller",
                           "--initial", "0,4", "--out", str(tmp_path / "x.json"))
        assert code == 3
        assert "10x1+x2>=14/3" in err
        assert not (tmp_path / "x.json").exists()

    def test_recipe_bytes_are_deterministic(self, capsys, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            runner.main(["hedge", "--model", FIG1, "--currency", "2", "--side", "buyer", "--out", str(path)])
        assert a.read_bytes() == b.read_bytes()


class TestArbCheck:
    def test_certificate(self, capsys, tmp_path):
        out_path = tmp_path / "arb.json"
        code, out, _ = run(capsys, "arb-check", "--model", FIG1, "--out", str(out_path))
        assert code == 0
        assert "no-arbitrage, certificate emitted" in out
        doc = json.loads(out_path.read_text())
        assert doc["status"] == "no-arbitrage"
        assert set(doc["certificate"]) == {"root", "u", "d", "uu", "ud", "du", "dd"}

    def test_witness(self, capsys):
        code, out, _ = run(capsys, "arb-check", "--model", str(MODELS / "arbitrage.json"))
        assert code == 2
        assert "arbitrage, witness emitted" in out


class TestPlot:
    def test_metadata_carries_exact_sets(self, capsys, tmp_path):
        svg = tmp_path / "z.svg"
        code, _, _ = run(capsys, "plot", "--model", FIG1, "--node", "root", "--sets", "Z,Y",
                         "--mark", "ask=0,14/3", "--out", str(svg))
        assert code == 0
        text = unescape(svg.read_text())
        assert "10x1+x2>=14/3" in text
        assert '<mark label="ask">(0/1,14/3)</mark>' in text

    def test_no_sets(self, capsys, tmp_path):
        svg = tmp_path / "blank.svg"
        assert runner.main(["plot", "--model", FIG1, "--node", "u", "--out", str(svg)]) == 0
        assert "<metadata/>" in svg.read_text()

    def test_deterministic_output(self, capsys, tmp_path):
        paths = [tmp_path / "1.svg", tmp_path / "2.svg"]
        for path in paths:
            runner.main(["plot", "--model", FIG1, "--node", "u", "--sets", "Z,V,X", "--side", "seller",
                         "--out", str(path)])
        assert paths[0].read_bytes() == paths[1].read_bytes()

    def test_unknown_set(self, capsys, tmp_path):
        code, _, err = run(capsys, "plot", "--model", FIG1, "--node", "u", "--sets", "Q",
                           "--out", str(tmp_path / "q.svg"))
        assert code == 1
        assert "unknown set names" in err

    def test_set_missing_at_leaf(self, capsys, tmp_path):
        code, _, err = run(capsys, "plot", "--model", FIG1, "--node", "uu", "--sets", "conv",
                           "--out", str(tmp_path / "c.svg"))
        assert code == 1
        assert "not defined" in err


@pytest.mark.slow
class TestDualCheck:
    def test_gaps_close(self, capsys):
        code, out, _ = run(capsys, "dual-check", "--model", FIG1, "--currency", "2")
        assert code == 0
        assert out.splitlines()[-1] == "ask gap 0/1, bid gap 0/1"

    def test_full_outer_grid(self, capsys, tmp_path):
        prefix = tmp_path / "dual"
        code, out, _ = run(capsys, "dual-check", "--model", FIG1, "--currency", "2", "--side", "bid",
                           "--grid", "2", "--full", "--out", str(prefix))
        assert code == 0
        assert out.splitlines()[0].startswith("bid 11/3: dual grid value ")
        doc = json.loads((tmp_path / "dual.buyer.json").read_text())
        outers = {json.dumps(e["outer"], sort_keys=True) for e in doc["entries"]}
        assert len(outers) == 14
        assert Fraction(doc["value"]) >= Fraction(11, 3)
