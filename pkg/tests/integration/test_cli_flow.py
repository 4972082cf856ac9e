import json
import os

import pytest
from click.testing import CliRunner

from toricount.cli import cli
from toricount.fanfile import FanFile
from toricount.toric import catalog


@pytest.fixture
def run(tmp_path):
    """Invoke the CLI inside an empty directory so no local configuration is picked up."""
    runner = CliRunner()

    def invoke(*args):
        with runner.isolated_filesystem(temp_dir=tmp_path):
            return runner.invoke(cli, list(args))

    return invoke


def _rows(result):
    assert result.exit_code == 0, result.output
    return json.loads(result.output)


def test_toricount_init(tmp_path):
    """Test toricount --init creates configuration file."""
    runner = CliRunner()

    with runner.isolated_filesystem(temp_dir=tmp_path):
        result = runner.invoke(cli, ["--init"])

        assert result.exit_code == 0
        assert "Created configuration" in result.output

        config_path = os.path.join(os.getcwd(), ".toricount", "config.yaml")
        assert os.path.exists(config_path)

        with open(config_path, "r") as f:
            content = f.read()
            assert "toricount configuration" in content
            assert "quick" in content

        # the generated file is loadable and its implicit profile applies
        result = runner.invoke(cli, ["count", "--catalog", "P2", "--degree", "1,1,1", "--json"])
        assert result.exit_code == 0, result.output

        result = runner.invoke(cli, ["--init"])
        assert "already exists" in result.output


def test_help_without_command(run):
    """Test toricount without a command prints the help."""
    result = run()
    assert result.exit_code == 0
    assert "verify" in result.output


def test_catalog(run):
    """Test the catalog listing in JSON."""
    rows = _rows(run("catalog", "--json"))
    names = [row["name"] for row in rows]
    assert names == ["P1", "P2", "P3", "P1xP1", "BlP2", "Fa(a)", "dP6"]
    hirzebruch = rows[names.index("Fa(a)")]
    assert "(-1,a)" in hirzebruch["rays"]
    assert hirzebruch["pic_rank"] == 2


def test_catalog_tsv(run):
    """Test the catalog listing in TSV."""
    result = run("catalog")
    assert result.exit_code == 0
    lines = result.output.splitlines()
    assert lines[0] == "name\tdim\tpic_rank\trays"
    assert lines[2].startswith("P2\t2\t1\t")


def test_validate(run, tmp_path):
    """Test validating a saved blowup fan reports its invariants."""
    path = tmp_path / "blowup.json"
    FanFile.from_fan(catalog("BlP2")).save(str(path))
    (row,) = _rows(run("validate", str(path), "--json"))
    assert row["name"] == "BlP2"
    assert row["pic_rank"] == 2
    assert sorted(row["primitive_collections"].split()) == ["{0,1}", "{2,3}"]
    assert row["class"] == "2:1,1:2,0:1"


class TestCount:
    def test_lines_in_the_plane(self, run):
        """Test the count row for lines in P2 over F_2."""
        (row,) = _rows(run("count", "--catalog", "P2", "--degree", "1,1,1", "--q", "2", "--json"))
        assert row == {"y": [1, 1, 1], "q": 2, "count": 24, "dim": 5, "leading": None, "class": None, "in_domain": True}

    def test_picard_coordinates(self, run):
        """Test a degree given in Picard coordinates is lifted."""
        (row,) = _rows(run("count", "--catalog", "P2", "--degree", "1", "--q", "2", "--json"))
        assert row["y"] == [1, 1, 1]
        assert row["count"] == 24

    def test_tsv(self, run):
        """Test the TSV count row without motivic data."""
        result = run("count", "--catalog", "P1", "--degree", "2,2", "--q", "2")
        assert result.exit_code == 0
        assert result.output.splitlines() == ["y\tq\tcount\tdim\tleading\tclass\tin_domain", "2,2\t2\t24\t5\t\t\ttrue"]

    def test_motivic_and_bruteforce(self, run):
        """Test the count row with motivic class and brute force columns."""
        (row,) = _rows(run("count", "--catalog", "P1", "--degree", "2,2", "--q", "2", "--motivic", "--bruteforce", "--json"))
        assert row["class"] == "5:1,3:-1"
        assert row["leading"] == 1
        assert row["consistent"] is True
        assert row["bruteforce"] == 24

    def test_report_row_layout(self, run):
        """Test the motivic row lists dim, leading coefficient and the sparse class in a fixed order."""
        result = run("count", "--catalog", "P1", "--degree", "1", "--q", "2", "--motivic")
        assert result.exit_code == 0, result.output
        assert result.output.splitlines() == [
            "y\tq\tcount\tdim\tleading\tclass\tin_domain\tconsistent",
            "1,1\t2\t6\t3\t1\t3:1,1:-1\ttrue\ttrue",
        ]

    def test_outside_the_domain(self, run):
        """Test a class outside the domain counts zero."""
        (row,) = _rows(run("count", "--catalog", "P2", "--degree", "1,2,1", "--q", "2", "--motivic", "--json"))
        assert row["count"] == 0
        assert row["in_domain"] is False

    def test_fan_file(self, run, tmp_path):
        """Test counting on a fan read from a file."""
        path = tmp_path / "p2.json"
        FanFile.from_fan(catalog("P2")).save(str(path))
        (row,) = _rows(run("count", "--fan", str(path), "--degree", "0", "--q", "3", "--json"))
        assert row["count"] == 4


def test_zeta(run):
    """Test the height zeta rows over F_2."""
    rows = _rows(run("zeta", "--catalog", "P2", "--q", "2", "--max-height", "3", "--json"))
    assert [row["coefficient"] for row in rows] == [1, 0, 0, 24]
    assert rows[0]["main_term"] == "21/4"
    assert rows[3]["main_term"] == 42
    assert rows[3]["difference"] == -18
    assert rows[0]["control"] is None


def test_zeta_motivic(run):
    """Test the motivic height zeta rows of the blowup."""
    rows = _rows(run("zeta", "--catalog", "BlP2", "--motivic", "--max-height", "4", "--json"))
    assert [row["d"] for row in rows] == [0, 1, 2, 3, 4]
    assert rows[1]["coefficient"] == "0"


def test_mu(run):
    """Test the finite field Möbius series in TSV."""
    result = run("mu", "--catalog", "P1", "--q", "2", "--max-total-degree", "4")
    assert result.exit_code == 0
    assert result.output.splitlines() == ["0,0\t1", "1,1\t-3", "2,2\t2"]


def test_mu_json(run):
    """Test the motivic Möbius series in JSON."""
    rows = _rows(run("mu", "--catalog", "P2", "--max-total-degree", "3", "--json"))
    assert [row["exponent"] for row in rows] == [[0, 0, 0], [1, 1, 1]]


class TestCox3:
    def test_constant_maps(self, run):
        """Test the cox3 count of constant maps and its Möbius check."""
        (row,) = _rows(run("cox3", "--degree", "0,0,0,0", "--q", "3", "--via-moebius", "--json"))
        assert row["y"] == [0, 0, 0, 0, 0, 0, 0]
        assert row["count"] == 2
        assert row["via_moebius"] == 2
        assert row["consistent"] is True

    def test_interpolate(self, run):
        """Test the interpolated cox3 counting polynomial."""
        (row,) = _rows(run("cox3", "--degree", "0,1,0,0", "--q", "2", "--interpolate", "--json"))
        assert row["count"] == 6
        assert row["dim"] == 4
        assert row["class"] == "4:1,3:-1,2:-1,1:1"
        assert row["leading"] == 1
        assert row["consistent"] is True


def test_verify(run):
    """Test the toric identities suite passes from the CLI."""
    rows = _rows(run("verify", "toric-identities", "--json"))
    assert rows
    assert all(row["status"] == "pass" for row in rows)


def test_count_log_is_tagged(run, tmp_path):
    """Test count log lines carry the variety, class and q tags."""
    log_file = tmp_path / "count.log"
    args = ["count", "--catalog", "P1", "--degree", "1,1", "--q", "2", "--bruteforce"]
    result = run("--enable-log", "--log-file", str(log_file), *args)
    assert result.exit_code == 0, result.output
    lines = log_file.read_text(encoding="utf-8").splitlines()
    assert any("[toricount.census] {variety=P1 y=1,1 q=2} bruteforce_count" in line for line in lines)
