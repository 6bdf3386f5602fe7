import subprocess
import sys
from pathlib import Path

import pytest

from trackduel.config import builtin_scenario, load_scenario, parse_scenario
from trackduel.errors import ConfigError, EmptyInput
from trackduel.experiment import nominal_episode, run_episode
from trackduel.records import read_episode, write_episode
from trackduel.cli import main


@pytest.fixture(scope="module")
def episode_file(tmp_path_factory):
    sc = builtin_scenario("straightaway")
    sc.iterations = 4000
    res = run_episode(sc, nominal_episode(sc, "OM", 3, seed=0))
    path = tmp_path_factory.mktemp("ep") / "episode.csv"
    write_episode(path, res)
    return path, res


class TestRecords:
    def test_round_trip_is_lossless(self, episode_file):
        path, res = episode_file
        rec = read_episode(path)
        assert rec.meta["delta_x"] == res.delta_x
        assert rec.meta["violation"] == res.violation.violated
        assert tuple(rec.meta["witness"]) == tuple(res.violation.witness)
        assert len(rec.rows) == 2 * (len(res.block_flags))
        for player in ("A", "D"):
            fr = rec.frenet(player)
            assert fr.d == res.frenet[player].d
            assert fr.e == res.frenet[player].e
            assert fr.v == res.frenet[player].v

    def test_rewrite_identical_bytes(self, episode_file, tmp_path):
        path, res = episode_file
        again = tmp_path / "again.csv"
        write_episode(again, res)
        assert again.read_bytes() == Path(path).read_bytes()

    def test_missing_column_named(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("# trackduel-episode v1\ntau,player,px,py\n0,A,1,2\n")
        with pytest.raises(ValueError, match="theta"):
            read_episode(bad)

    def test_malformed_row_has_line_number(self, episode_file, tmp_path):
        path, _ = episode_file
        lines = Path(path).read_text().splitlines()
        lines[20] = lines[20] + ",extra"
        bad = tmp_path / "mangled.csv"
        bad.write_text("\n".join(lines))
        with pytest.raises(ValueError, match=":21"):
            read_episode(bad)

    def test_empty_file_rejected(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        with pytest.raises(EmptyInput):
            read_episode(empty)


class TestConfig:
    def test_builtin_scenarios_parse(self):
        for name in ("straightaway", "corner"):
            sc = builtin_scenario(name)
            assert sc.track.total_length > 80.0
            assert sc.game.horizon % sc.game.rounds == 0

    def test_missing_field_diagnosed(self):
        with pytest.raises(ConfigError, match="track"):
            parse_scenario({"scenario": "straightaway"})

    def test_bad_divisibility_diagnosed(self):
        doc = builtin_scenario("straightaway").raw
        import copy

        bad = copy.deepcopy(doc)
        bad["game"]["rounds"] = 4
        with pytest.raises(ConfigError, match="divisible"):
            parse_scenario(bad)

    def test_short_track_diagnosed(self):
        import copy

        bad = copy.deepcopy(builtin_scenario("straightaway").raw)
        bad["track"]["segments"] = [{"type": "straight", "length": 30.0}]
        with pytest.raises(ConfigError, match="track too short"):
            parse_scenario(bad)

    def test_digest_stable(self):
        a = builtin_scenario("straightaway").digest()
        b = builtin_scenario("straightaway").digest()
        assert a == b and len(a) == 16


class TestCli:
    def test_check_reproduces_stored_flag(self, episode_file, capsys):
        path, _ = episode_file
        code = main(["check", str(path)])
        out = capsys.readouterr().out
        assert code == 0
        assert "consistent" in out

    def test_check_reports_witness_for_om_pattern(self, tmp_path, capsys):
        # handcrafted file with block pattern 0,1,0,1
        rows = ["# case: OM", "tau,player,px,py,theta,v,d,e,block"]
        flags = [0, 1, 0, 1]
        for tau, b in enumerate(flags):
            e_def = 0.0 if b else 2.5
            rows.append(f"{tau},D,0.0,0.0,0.0,10.0,{float(tau + 1)!r},{e_def!r},{b}")
        for tau, b in enumerate(flags):
            rows.append(f"{tau},A,0.0,0.0,0.0,10.0,{float(tau)!r},0.0,{b}")
        path = tmp_path / "pattern.csv"
        path.write_text("\n".join(rows) + "\n")
        code = main(["check", str(path), "--rules", "OM"])
        out = capsys.readouterr().out
        assert code == 0
        assert "witness timesteps = (0, 1, 2, 3)" in out

    def test_run_smoke_and_table(self, tmp_path, capsys):
        out = tmp_path / "ep.csv"
        code = main(
            [
                "run",
                "--scenario",
                "straightaway",
                "--case",
                "OM",
                "--setting",
                "1",
                "--iterations",
                "2000",
                "--out",
                str(out),
            ]
        )
        assert code == 0
        assert out.exists()
        text = capsys.readouterr().out
        assert "delta_x" in text

        code = main(["table", str(tmp_path)])
        table1 = capsys.readouterr().out
        assert code == 0
        assert "OM lead dist" in table1
        code = main(["table", str(tmp_path)])
        table2 = capsys.readouterr().out
        assert table1 == table2  # idempotent

    def test_entry_point_installed(self):
        proc = subprocess.run(
            [sys.executable, "-m", "trackduel.cli", "--version"],
            capture_output=True,
            text=True,
        )
        assert proc.returncode == 0


class TestManifestAndWorkers:
    def test_manifest_round_trip(self, tmp_path):
        from trackduel.records import RunManifest

        m = RunManifest(
            config_digest="abc123", base_seed=7, version="0.1.0",
            episodes=["a.csv", "b.csv"],
        )
        m.write(tmp_path / "manifest.json")
        back = RunManifest.read(tmp_path / "manifest.json")
        assert back.config_digest == m.config_digest
        assert back.base_seed == m.base_seed
        assert back.episodes == m.episodes
        assert back.created

    def test_batch_outputs_independent_of_worker_count(self, tmp_path):
        import subprocess

        outs = {}
        for workers in ("1", "2"):
            out = tmp_path / f"w{workers}"
            subprocess.run(
                [
                    sys.executable, "-m", "trackduel.cli", "batch",
                    "--outdir", str(out), "--episodes", "2",
                    "--scenarios", "straightaway", "--cases", "OM",
                    "--settings", "1", "--seed", "3",
                    "--iterations", "1500", "--workers", workers,
                ],
                check=True,
            )
            outs[workers] = {
                f.name: f.read_bytes() for f in out.glob("*.csv")
            }
        assert outs["1"] == outs["2"]

    def test_manifest_references_existing_files(self, tmp_path):
        import subprocess
        from trackduel.records import RunManifest

        out = tmp_path / "b"
        subprocess.run(
            [
                sys.executable, "-m", "trackduel.cli", "batch",
                "--outdir", str(out), "--episodes", "1",
                "--scenarios", "straightaway", "--cases", "OM",
                "--settings", "1", "--seed", "5",
                "--iterations", "1500", "--workers", "1",
            ],
            check=True,
        )
        manifest = RunManifest.read(out / "manifest.json")
        assert manifest.episodes
        for name in manifest.episodes:
            assert (out / name).exists()
        from trackduel.config import builtin_scenario

        assert manifest.config_digest == builtin_scenario("straightaway").digest()
