from __future__ import annotations

from pathlib import Path

import pytest

from tkd.cli import main, parse_quantity
from tkd.structure import load_module

from conftest import FIXTURES, read_fixture


def run(capsys, *argv) -> tuple[int, str, str]:
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_validate_ok(capsys):
    code, out, _ = run(capsys, "validate", str(FIXTURES / "spec.tks"))
    assert code == 0
    assert "ok: СПЕЦИФИКАЦИЯ" in out


def test_validate_broken_reports_line(tmp_path, capsys):
    bad = tmp_path / "bad.tks"
    bad.write_text('table "T"\n  cols {\n    leaf "A" [width=0]\n  }\n', encoding="utf-8")
    code, out, _ = run(capsys, "validate", str(bad))
    assert code == 1
    assert "positive" in out


def test_validate_syntax_error_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.tks"
    bad.write_text('table "T" { leaf }', encoding="utf-8")
    code, _, err = run(capsys, "validate", str(bad))
    assert code == 1
    assert "error [syntax-error]" in err
    assert "1:" in err


def test_new_and_render_golden(tmp_path, capsys):
    out_tkm = tmp_path / "pasted_spec.tkm"
    out_tkm.write_text(read_fixture("pasted_spec.tkm"), encoding="utf-8")
    code, out, _ = run(capsys, "render", str(out_tkm), "--fmt", "text")
    assert code == 0
    assert out == read_fixture("golden/pasted_spec.txt")


def test_render_svg_output_file(tmp_path, capsys):
    target = tmp_path / "out.svg"
    code, _, _ = run(capsys, "render", str(FIXTURES / "flange.tkm"), "--fmt", "svg", "-o", str(target))
    assert code == 0
    assert target.read_text(encoding="utf-8") == read_fixture("golden/flange.svg")


def test_usage_error_exit_2(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["render"])
    assert exc.value.code == 2


def test_paginate_numbers(capsys):
    code, out, _ = run(capsys, "paginate", str(FIXTURES / "flange.tkm"), "--height", "120", "--numbers", "25")
    assert code == 0
    assert out == read_fixture("golden/flange_numbered.txt")


def test_spec_gen_matches_library(tmp_path, capsys):
    out_path = tmp_path / "spec.tkm"
    code, _, _ = run(
        capsys,
        "spec-gen",
        "--scope",
        "site1.dwgp,site2.dwgp",
        "--types",
        "position_label",
        "--template",
        str(FIXTURES / "spec.tks"),
        "--data-dir",
        str(FIXTURES),
        "-o",
        str(out_path),
    )
    assert code == 0

    from tkd.model import new_table
    from tkd.pipeline import CollectionScope, autofill, collect
    from tkd.structure import parse_structure, save_module

    scope = CollectionScope(files=("site1.dwgp", "site2.dwgp"), element_types=frozenset({"position_label"}))
    expected, _ = autofill(new_table(parse_structure(read_fixture("spec.tks"))), collect(scope, base_dir=FIXTURES))
    assert out_path.read_text(encoding="utf-8") == save_module(expected)


def test_spec_gen_unknown_type(capsys):
    code, _, err = run(
        capsys,
        "spec-gen",
        "--scope",
        "site1.dwgp",
        "--types",
        "sprocket",
        "--template",
        str(FIXTURES / "spec.tks"),
        "--data-dir",
        str(FIXTURES),
    )
    assert code == 1
    assert "sprocket" in err


def test_catalog_query_filters(capsys):
    code, out, _ = run(
        capsys,
        "catalog",
        "query",
        "--catalogs",
        str(FIXTURES / "pipes.cat"),
        "--class",
        "Трубы",
        "--p",
        "1.6МПа",
        "--dn",
        "50",
    )
    assert code == 0
    assert "8732-78" in out
    assert "1 item(s)" in out


def test_catalog_query_kgf_units(capsys):
    # 16 кгс/см² ≈ 1.57 МПа: same single match
    code, out, _ = run(
        capsys,
        "catalog",
        "query",
        "--catalogs",
        str(FIXTURES / "pipes.cat"),
        "--class",
        "Трубы",
        "--p",
        "16кгс/см2",
        "--dn",
        "50",
    )
    assert code == 0
    assert "1 item(s)" in out


def test_catalog_query_unknown_class(capsys):
    code, _, err = run(
        capsys,
        "catalog",
        "query",
        "--catalogs",
        str(FIXTURES / "pipes.cat"),
        "--class",
        "Арматура",
    )
    assert code == 1
    assert "unknown-object-class" in err


def test_buffer_copy_paste_cycle(tmp_path, capsys):
    buf_path = tmp_path / "rows.tkb"
    out_path = tmp_path / "pasted.tkm"
    code, _, _ = run(capsys, "buffer", "copy", str(FIXTURES / "explication_filled.tkm"), "-o", str(buf_path))
    assert code == 0
    spec_tkm = tmp_path / "spec.tkm"
    code, _, _ = run(capsys, "new", str(FIXTURES / "spec.tks"), "-o", str(spec_tkm))
    assert code == 0
    code, _, err = run(
        capsys, "buffer", "paste", str(spec_tkm), "--buffer", str(buf_path), "--at", "0", "-o", str(out_path)
    )
    assert code == 0
    assert "7" in err  # Характеристика dropped
    pasted = load_module(out_path.read_text(encoding="utf-8"))
    assert pasted.data_record_count == 7
    assert out_path.read_text(encoding="utf-8") == read_fixture("pasted_spec.tkm")


def test_non_utf8_input_is_a_domain_error(tmp_path, capsys):
    bad = tmp_path / "bad.tks"
    bad.write_bytes(b'table "\xc3\x28" { leaf \xff\xfe }')
    code, _, err = run(capsys, "validate", str(bad))
    assert code == 1
    assert "UTF-8" in err


def test_parse_quantity_literals():
    assert parse_quantity("1.6МПа", "МПа") == (1.6, "МПа")
    assert parse_quantity("80C", "°C") == (80.0, "°C")
    assert parse_quantity("16 кгс/см2", "МПа") == (16.0, "кгс/см²")
    assert parse_quantity("2.5", "МПа") == (2.5, "МПа")
