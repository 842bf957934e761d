import subprocess
import sys

import pytest

from drugner.fileio import atomic_write_bytes, atomic_write_text


class TestAtomicWrites:
    def test_write_and_overwrite(self, tmp_path):
        path = tmp_path / "out.txt"
        atomic_write_text(path, "first")
        atomic_write_text(path, "second")
        assert path.read_text() == "second"

    def test_no_temp_files_left_behind(self, tmp_path):
        atomic_write_bytes(tmp_path / "a.bin", b"\x00\x01")
        assert sorted(p.name for p in tmp_path.iterdir()) == ["a.bin"]

    def test_failure_leaves_no_partial_output(self, tmp_path):
        path = tmp_path / "out.txt"
        atomic_write_text(path, "intact")

        class Boom:
            def __bytes__(self):
                raise RuntimeError("boom")

            def decode(self, *a):
                raise RuntimeError("boom")

        with pytest.raises(Exception):
            atomic_write_bytes(path, Boom())  # type: ignore[arg-type]
        assert path.read_text() == "intact"
        assert sorted(p.name for p in tmp_path.iterdir()) == ["out.txt"]


def test_console_script_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "drugner.cli", "--help"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert "convert" in proc.stdout and "predict" in proc.stdout
