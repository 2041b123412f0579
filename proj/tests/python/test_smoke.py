import pytest

import kcagree


def test_pair_code_round_trip():
    code = kcagree.encode_pair("01", "110")
    assert code == "00011110"
    assert len(code) == 2 * 2 + 1 + 3
    assert kcagree.decode_pair(code) == ("01", "110")


def test_pad_pair_length():
    pi, x, code = kcagree.pad_pair("1", "0", 9)
    assert len(code) == 9
    assert kcagree.decode_pair(code) == (pi, x)


def test_malformed_code_raises_validation_error():
    with pytest.raises(kcagree.ValidationError):
        kcagree.decode_pair("0000")
    assert issubclass(kcagree.ValidationError, kcagree.Error)


def test_bad_bit_raises():
    with pytest.raises(kcagree.ValidationError):
        kcagree.encode_pair("2", "")


def test_vm_programs():
    # OUT1 OUT0 HALT
    assert kcagree.run_single("101100000") == "10"
    # SEND1 HALT against RECV HALT
    out = kcagree.run_interactive("010000", "011000")
    assert out["transcript"].startswith("1")
    assert out["halted_a"] and out["halted_b"]


def test_complexities():
    # The empty program halts with empty output; "1" needs OUT1.
    assert kcagree.plain_complexity("", max_len=6) == 0
    assert kcagree.plain_complexity("1", max_len=6) == 3
    assert kcagree.interactive_complexity("01", "1") == 9
    assert kcagree.plain_complexity("1" * 10, max_len=3) is None


def test_hash_family():
    assert kcagree.hash_apply(2, 2, "1101", "11") == "01"
    assert kcagree.hash_apply(2, 2, "1101", "10") == "10"
    coll, total = kcagree.collision_fraction(3, 2, "001", "110")
    assert coll * 4 == total


def test_protocols():
    assert "toydh" in kcagree.protocol_names()
    run = kcagree.execute("toydh", 40, 7)
    assert run == kcagree.execute("toydh", 40, 7)
    assert run["out_a"] == run["out_b"]
    assert kcagree.check_dh_like("null", 1)["bijective"]
    assert not kcagree.check_dh_like("coinflip", 1)["bijective"]
    with pytest.raises(kcagree.ValidationError):
        kcagree.execute("toydh", 8, 1)


def test_experiment_reports():
    assert "levin" in kcagree.experiments()
    assert kcagree.defaults("hash_verify")["rho"] == 3
    rep = kcagree.run_experiment("hash_verify", {"rho": 2, "k": 1})
    assert rep["experiment"] == "hash_verify"
    assert rep["result"]["pass"]
    one = kcagree.run_experiment("levin", {"n": 12, "trials": 500}, threads=1)
    four = kcagree.run_experiment("levin", {"n": 12, "trials": 500}, threads=4)
    assert one == four


def test_unknown_config_key():
    with pytest.raises(kcagree.ValidationError):
        kcagree.run_experiment("levin", {"bogus": 1})
