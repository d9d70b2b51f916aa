"""Binary model container round trips and corruption handling."""

import struct

import numpy as np
import pytest

from spoofguard.container import MAGIC, VERSION, read_container, write_container


class TestRoundTrip:
    def test_bit_identical_payloads(self, tmp_path):
        rng = np.random.default_rng(0)
        sections = {
            "matrix": rng.standard_normal((7, 5)),
            "vector": rng.standard_normal(11),
            "scalar": np.float64(np.pi),
            "cube": rng.standard_normal((2, 3, 4)),
            "tiny": np.array([5e-324, -0.0, np.inf, -np.inf]),
        }
        p = tmp_path / "m.spgd"
        write_container(p, sections)
        back = read_container(p)
        assert list(back) == list(sections)  # insertion order preserved
        for name, val in sections.items():
            arr = np.asarray(val, dtype=np.float64)
            assert back[name].dtype == np.float64
            assert back[name].shape == arr.shape
            assert back[name].tobytes() == arr.tobytes()

    def test_nan_payload_survives(self, tmp_path):
        p = tmp_path / "nan.spgd"
        write_container(p, {"x": np.array([np.nan, 1.0])})
        back = read_container(p)["x"]
        assert np.isnan(back[0]) and back[1] == 1.0

    def test_empty_container(self, tmp_path):
        p = tmp_path / "empty.spgd"
        write_container(p, {})
        assert read_container(p) == {}

    def test_zero_length_array(self, tmp_path):
        p = tmp_path / "z.spgd"
        write_container(p, {"empty": np.empty((0, 4))})
        assert read_container(p)["empty"].shape == (0, 4)

    def test_integer_input_stored_as_float64(self, tmp_path):
        p = tmp_path / "i.spgd"
        write_container(p, {"ints": np.arange(4)})
        back = read_container(p)["ints"]
        assert back.dtype == np.float64
        np.testing.assert_array_equal(back, [0.0, 1.0, 2.0, 3.0])


class TestAllowedNames:
    def test_allowed_set_enforced(self, tmp_path):
        p = tmp_path / "m.spgd"
        write_container(p, {"good": np.zeros(2), "rogue": np.zeros(2)})
        with pytest.raises(ValueError, match="rogue"):
            read_container(p, allowed={"good"})
        ok = read_container(p, allowed={"good", "rogue"})
        assert set(ok) == {"good", "rogue"}


class TestCorruption:
    def _valid_bytes(self, tmp_path):
        p = tmp_path / "ok.spgd"
        write_container(p, {"a": np.arange(6.0).reshape(2, 3)})
        return p.read_bytes()

    def test_bad_magic(self, tmp_path):
        p = tmp_path / "bad.spgd"
        raw = self._valid_bytes(tmp_path)
        p.write_bytes(b"XXXX" + raw[4:])
        with pytest.raises(ValueError, match="not a model container"):
            read_container(p)

    def test_future_version(self, tmp_path):
        p = tmp_path / "vers.spgd"
        raw = bytearray(self._valid_bytes(tmp_path))
        raw[4:8] = struct.pack("<I", VERSION + 1)
        p.write_bytes(bytes(raw))
        with pytest.raises(ValueError, match="newer than supported"):
            read_container(p)

    def test_truncated_payload(self, tmp_path):
        p = tmp_path / "trunc.spgd"
        raw = self._valid_bytes(tmp_path)
        p.write_bytes(raw[:-5])
        with pytest.raises(ValueError, match="truncated"):
            read_container(p)

    def test_truncated_header(self, tmp_path):
        p = tmp_path / "hdr.spgd"
        p.write_bytes(MAGIC + b"\x01")
        with pytest.raises(ValueError, match="truncated"):
            read_container(p)

    def test_unknown_dtype_tag(self, tmp_path):
        p = tmp_path / "tag.spgd"
        body = MAGIC + struct.pack("<I", VERSION)
        body += struct.pack("<I", 1) + b"a" + struct.pack("<BB", 9, 0)
        p.write_bytes(body)
        with pytest.raises(ValueError, match="dtype tag"):
            read_container(p)

    def test_absurd_name_length(self, tmp_path):
        p = tmp_path / "name.spgd"
        body = MAGIC + struct.pack("<I", VERSION) + struct.pack("<I", 2 ** 31)
        p.write_bytes(body)
        with pytest.raises(ValueError, match="name length"):
            read_container(p)

    def test_duplicate_section(self, tmp_path):
        p = tmp_path / "dup.spgd"
        one = struct.pack("<I", 1) + b"a" + struct.pack("<BB", 1, 0) + \
            struct.pack("<d", 1.0)
        p.write_bytes(MAGIC + struct.pack("<I", VERSION) + one + one)
        with pytest.raises(ValueError, match="duplicate"):
            read_container(p)

    def test_write_rejects_bad_names(self, tmp_path):
        with pytest.raises(ValueError, match="name"):
            write_container(tmp_path / "x.spgd", {"": np.zeros(1)})
