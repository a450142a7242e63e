"""Verification schemes, message assembly and key extraction"""

import json

import numpy as np
import pytest

from lib.errors import SchemeError, SizeError
from lib.scheme_manager import (
    SchemeKind,
    Verdict,
    VerificationScheme,
    assemble_message,
    bits_to_value,
    build_scheme,
    dump_scheme,
    extract_key,
    load_scheme,
    message_from_bits,
    message_from_value,
    scheme_from_dict,
    scheme_to_dict,
    value_to_bits,
)


class TestBuiltinLayouts:
    def test_pair_compartment(self):
        scheme = build_scheme("pair_compartment", 3)
        assert scheme.total_qubits == 6
        assert scheme.verification_positions == (1, 3, 5)
        assert scheme.compartments == ((0, 1), (2, 3), (4, 5))
        assert set(scheme.intended.values()) == {0}
        assert scheme.public

    def test_pair_flat(self):
        scheme = build_scheme("pair_flat", 3)
        assert scheme.verification_positions == (1, 3, 5)
        assert scheme.compartments == ((0, 1, 2, 3, 4, 5),)

    def test_triple_layouts(self):
        compartment = build_scheme("triple_compartment", 2)
        flat = build_scheme("triple_flat", 2)
        assert compartment.verification_positions == (1, 2, 4, 5)
        assert compartment.compartments == ((0, 1, 2), (3, 4, 5))
        assert flat.verification_positions == (1, 2, 4, 5)
        assert flat.compartments == (tuple(range(6)),)
        assert flat.key_positions == (0, 3)

    @pytest.mark.parametrize("kind", ["bb84_random", "qft_random"])
    def test_random_layouts(self, kind):
        scheme = build_scheme(kind, 4, np.random.default_rng(5))
        assert scheme.total_qubits == 8
        assert len(scheme.verification) == 4
        assert scheme.num_key_qubits == 4
        assert not scheme.public
        if kind == "bb84_random":
            assert len(scheme.compartments) == 8
        else:
            assert len(scheme.compartments) == 1

    def test_random_layouts_are_seeded(self):
        first = build_scheme("qft_random", 5, np.random.default_rng(11))
        second = build_scheme("qft_random", 5, np.random.default_rng(11))
        assert first == second

    def test_unknown_kind_and_bad_size(self):
        with pytest.raises(SchemeError):
            build_scheme("ring", 2)
        with pytest.raises(SchemeError):
            build_scheme("pair_flat", 0)

    def test_kind_names(self):
        assert [k.value for k in SchemeKind][2:] == [
            "pair_compartment",
            "pair_flat",
            "triple_compartment",
            "triple_flat",
        ]
        assert build_scheme("pair_flat", 1).name == "pair_flat"


class TestSchemeValidation:
    def test_duplicate_verification_index(self):
        with pytest.raises(SchemeError):
            VerificationScheme(2, ((1, 0), (1, 1)), ((0, 1),))

    def test_out_of_range_index(self):
        with pytest.raises(SchemeError):
            VerificationScheme(2, ((2, 0),), ((0, 1),))

    def test_bad_intended_bit(self):
        with pytest.raises(SchemeError):
            VerificationScheme(2, ((1, 2),), ((0, 1),))

    @pytest.mark.parametrize(
        "compartments", [((0,),), ((0, 1), (1,)), ((0, 1), ()), ((0, 2),)]
    )
    def test_compartments_must_partition(self, compartments):
        with pytest.raises(SchemeError):
            VerificationScheme(2, (), compartments)


class TestMessages:
    def test_bits_value_convention(self):
        assert bits_to_value([1, 0, 1]) == 5
        assert value_to_bits(6, 3) == (0, 1, 1)

    def test_assemble_pair_compartment(self):
        scheme = build_scheme("pair_compartment", 3)
        message = assemble_message([1, 0, 1], scheme)
        assert message.bits == (1, 0, 0, 0, 1, 0)
        assert message.key_bits == (1, 0, 1)
        assert message.value == 0b010001

    def test_assemble_wrong_key_length(self):
        with pytest.raises(SizeError):
            assemble_message([1, 0], build_scheme("pair_flat", 3))

    def test_message_constructors_agree(self):
        scheme = build_scheme("triple_flat", 2)
        message = message_from_bits([1, 0, 0, 1, 0, 0], scheme)
        assert message_from_value(message.value, scheme) == message

    def test_message_bits_validated(self):
        scheme = build_scheme("pair_flat", 1)
        with pytest.raises(SchemeError):
            message_from_bits([2, 0], scheme)
        with pytest.raises(SizeError):
            message_from_bits([0], scheme)

    def test_intended_bits(self):
        scheme = build_scheme("triple_compartment", 2)
        assert scheme.intended_bits([1, 1]) == (1, 0, 0, 1, 0, 0)


class TestExtraction:
    def test_clean_message_passes(self):
        scheme = build_scheme("pair_flat", 2)
        extraction = extract_key(assemble_message([1, 1], scheme), scheme)
        assert extraction.verdict is Verdict.PASS
        assert extraction.key == (1, 1)
        assert extraction.mismatches == 0
        assert extraction.verification_observed == (0, 0)

    def test_mismatch_fails(self):
        scheme = build_scheme("pair_compartment", 2)
        measured = message_from_bits([0, 1, 1, 0], scheme)
        extraction = extract_key(measured, scheme)
        assert extraction.verdict is Verdict.FAIL
        assert extraction.mismatches == 1

    def test_mismatch_limit_tolerates_errors(self):
        scheme = build_scheme("triple_compartment", 1)
        measured = message_from_bits([0, 1, 1], scheme)
        assert extract_key(measured, scheme, mismatch_limit=1).verdict is Verdict.FAIL
        assert extract_key(measured, scheme, mismatch_limit=2).verdict is Verdict.PASS

    def test_scheme_without_verification_always_passes(self):
        scheme = VerificationScheme(2, (), ((0, 1),))
        extraction = extract_key(message_from_bits([1, 1], scheme), scheme)
        assert extraction.verdict is Verdict.PASS
        assert extraction.key == (1, 1)

    def test_negative_limit_and_size(self):
        scheme = build_scheme("pair_flat", 1)
        with pytest.raises(SchemeError):
            extract_key(message_from_bits([0, 0], scheme), scheme, mismatch_limit=-1)
        other = build_scheme("pair_flat", 2)
        with pytest.raises(SizeError):
            extract_key(message_from_bits([0, 0, 0, 0], other), scheme)


class TestSchemeDocuments:
    def test_dict_round_trip(self):
        scheme = build_scheme("qft_random", 3, np.random.default_rng(2))
        parsed = scheme_from_dict(scheme_to_dict(scheme), kind="qft_random")
        assert parsed == scheme

    def test_file_round_trip(self, tmp_path):
        scheme = build_scheme("triple_compartment", 2)
        path = tmp_path / "triple.json"
        dump_scheme(scheme, path)
        loaded = load_scheme(path)
        assert loaded.verification == scheme.verification
        assert loaded.compartments == scheme.compartments
        assert loaded.name == "triple"

    def test_unknown_fields_rejected(self):
        data = scheme_to_dict(build_scheme("pair_flat", 1))
        data["colour"] = "blue"
        with pytest.raises(SchemeError):
            scheme_from_dict(data)
        data = scheme_to_dict(build_scheme("pair_flat", 1))
        data["verification"][0]["weight"] = 1
        with pytest.raises(SchemeError):
            scheme_from_dict(data)

    def test_missing_fields_rejected(self):
        data = scheme_to_dict(build_scheme("pair_flat", 1))
        del data["public"]
        with pytest.raises(SchemeError):
            scheme_from_dict(data)

    @pytest.mark.parametrize(
        "field, value",
        [
            ("total_qubits", 2.9),
            ("total_qubits", "2"),
            ("verification", {"index": 1, "bit": 0}),
            ("compartments", [0, 1]),
            ("compartments", [[0, 1.0]]),
        ],
    )
    def test_mistyped_fields_rejected(self, field, value):
        data = scheme_to_dict(build_scheme("pair_flat", 1))
        data[field] = value
        with pytest.raises(SchemeError):
            scheme_from_dict(data)

    @pytest.mark.parametrize("key, value", [("bit", True), ("index", 1.0), ("index", None)])
    def test_mistyped_verification_entry(self, key, value):
        data = scheme_to_dict(build_scheme("pair_flat", 1))
        data["verification"][0][key] = value
        with pytest.raises(SchemeError):
            scheme_from_dict(data)

    def test_bad_files(self, tmp_path):
        with pytest.raises(SchemeError):
            load_scheme(tmp_path / "missing.json")
        broken = tmp_path / "broken.json"
        broken.write_text("{not json")
        with pytest.raises(SchemeError):
            load_scheme(broken)
        listed = tmp_path / "listed.json"
        listed.write_text(json.dumps([1, 2]))
        with pytest.raises(SchemeError):
            load_scheme(listed)
