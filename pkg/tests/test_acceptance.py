"""Acceptance criteria 1-8, one test each.

Each test records a ``PASS``/``FAIL`` line that the terminal summary prints
(see conftest); ``python tests/test_acceptance.py`` prints them directly.
"""
from __future__ import annotations

import json
import os
import random
import shutil
import subprocess
import sys
import tempfile
import time
from pathlib import Path

from cgpl.cli import main
from cgpl.composer import compose
from cgpl.dialect import DialectConfig, parse_artifact, serialize_artifact
from cgpl.ldl import format_ldl, parse_ldl
from cgpl.pcl import format_pcl, parse_pcl
from cgpl.pipeline import load_product_line
from cgpl.stats import COLUMNS, compute_stats
from cgpl.validator import ConflictKind, check

sys.path.insert(0, str(Path(__file__).parent))
from builders import build_pl, tree_hash, write_tree  # noqa: E402
from conftest import CORPUS, FIXTURES, GOLDEN  # noqa: E402
from generators import (random_composition_case, random_graph_case, random_layer_stack,  # noqa: E402
                        random_ldl_model, random_marked_text, random_pcl_model, random_vr_tree)
from oracles import (OracleDanglingSuper, SpliceOracle, count_stats, cycle_groups,  # noqa: E402
                     multi_refined, reachable_colors, simple_cycles)

RESULTS: list[str] = []
D = DialectConfig()


def record(number: int, title: str, ok: bool, detail: str) -> None:
    RESULTS.append(f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} -- {detail}")
    assert ok, detail


def _cli(*argv) -> tuple[int, str]:
    """In-process CLI run with stdout captured."""
    import contextlib
    import io
    out, err = io.StringIO(), io.StringIO()
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        code = main([str(a) for a in argv])
    return code, out.getvalue()


def _cgpl_command() -> list[str]:
    exe = shutil.which("cgpl")
    return [exe] if exe else [sys.executable, "-m", "cgpl"]


# 1 ---------------------------------------------------------------------------------

def test_criterion_1_corpus_example_golden(tmp_path):
    root = shutil.copytree(CORPUS, tmp_path / "factory")
    out_dir = tmp_path / "gen"
    env = dict(os.environ, CGPL_COLOR="never")
    t0 = time.perf_counter()
    proc = subprocess.run([*_cgpl_command(), "compose", "--root", str(root), "--output", str(out_dir)],
                          capture_output=True, text=True, env=env)
    elapsed = time.perf_counter() - t0
    composed = (out_dir / "base/Class.xpt").read_text(encoding="utf-8") if proc.returncode == 0 else ""
    golden = (GOLDEN / "factory_Class.xpt").read_text(encoding="utf-8")
    blocks = {c.name: c for c in parse_artifact(composed, D).children} if composed else {}
    has_create = "FurtherMethods" in blocks and \
        "public static [Name] create(...) {" in blocks["FurtherMethods"].literal_text()
    setter = blocks["SetterMethod"].literal_text().splitlines()[1:3] if "SetterMethod" in blocks else []
    setter_ok = setter == ["  assert([Name] != null);", "  this.[Name] = [Name];"]
    ok = (proc.returncode == 0 and has_create and setter_ok and composed == golden and elapsed < 1.0
          and not list(out_dir.rglob("ClassWithFact*")))
    record(1, "corpus example end-to-end", ok,
           f"exit={proc.returncode}, create() in FurtherMethods={has_create}, setter assert+original={setter_ok}, "
           f"golden byte-equal={composed == golden}, runtime={elapsed:.3f}s (< 1 s)")


# 2 ---------------------------------------------------------------------------------

def test_criterion_2_two_conflict_fixture():
    code, out = _cli("validate", "--root", FIXTURES / "conflicts", "--json")
    doc = json.loads(out)
    cycles = [c for c in doc["conflicts"] if c["kind"] == "Cycle"]
    multi = [c for c in doc["conflicts"] if c["kind"] == "MultipleRefiners"]
    names = lambda ws: [f"{w['signature']}@{w['layer']}" for w in ws]  # noqa: E731
    cycle_ok = len(cycles) == 1 and names(cycles[0]["witnesses"]) == ["C1@L1", "C1@L3", "C1@L2", "C1@L1"]
    multi_ok = (len(multi) == 1 and names(multi[0]["witnesses"])[0] == "C2@L1"
                and sorted(names(multi[0]["witnesses"])[1:]) == ["C2@L3", "ext.C2@L2"])
    ok = code == 1 and cycle_ok and multi_ok and len(doc["conflicts"]) == 2
    record(2, "two-conflict fixture", ok,
           f"exit={code}, cycles={len(cycles)} {names(cycles[0]['witnesses']) if cycles else []}, "
           f"multiple-refiners={len(multi)} {names(multi[0]['witnesses']) if multi else []}")


# 3 ---------------------------------------------------------------------------------

def test_criterion_3_automatic_layer_selection():
    pl = load_product_line(CORPUS).product_line
    closure = check(pl, ["factoryVariant"])[1].closure
    corpus_ok = set(closure) == {"factoryVariant", "baseVariant"}
    rng = random.Random(20240603)
    mismatches = 0
    for _ in range(200):
        stack = random_layer_stack(rng, max_layers=6)
        selected = rng.sample(stack.layers, rng.randint(1, len(stack.layers)))
        result = check(build_pl(stack.files, stack.ldl), selected)[1]
        if not result.ok or set(result.closure) != reachable_colors(selected, stack.deps):
            mismatches += 1
    record(3, "automatic layer selection", corpus_ok and mismatches == 0,
           f"factoryVariant closure={list(closure)}; 200 random stacks, mismatches={mismatches}")


# 4 ---------------------------------------------------------------------------------

def test_criterion_4_validator_soundness():
    rng = random.Random(4242)
    cycle_bad = multi_bad = with_cycles = with_multi = 0
    for _ in range(500):
        case = random_graph_case(rng, max_nodes=12)
        result = check(build_pl(case.files, case.ldl, layers=case.layers), case.layers)[1]
        index = {f"{layer}/{art}": i for i, (layer, art) in enumerate(case.nodes)}
        idx = {n: index[f"{n.color}/{n.signature}"] for n in result.graph.nodes}
        cycles = [[idx[n] for n in c.witnesses] for c in result.conflicts if c.kind is ConflictKind.CYCLE]
        brute = simple_cycles(len(case.nodes), case.edges)
        brute_sets = {frozenset(c) for c in brute}
        valid = all(all((u, v) in case.edges for u, v in zip(c, c[1:])) and frozenset(c[:-1]) in brute_sets
                    for c in cycles)
        if bool(cycles) != bool(brute) or len(cycles) != len(cycle_groups(len(case.nodes), case.edges)) \
                or not valid:
            cycle_bad += 1
        multi = {idx[c.refined]: {idx[n] for n in c.refiners}
                 for c in result.conflicts if c.kind is ConflictKind.MULTIPLE_REFINERS}
        if multi != multi_refined(case.edges):
            multi_bad += 1
        with_cycles += bool(brute)
        with_multi += bool(multi_refined(case.edges))
    record(4, "validator soundness", cycle_bad == 0 and multi_bad == 0,
           f"500 graphs (<=12 nodes; {with_cycles} cyclic, {with_multi} with shared targets), "
           f"cycle disagreements={cycle_bad}, multiple-refiner disagreements={multi_bad}")


# 5 ---------------------------------------------------------------------------------

def test_criterion_5_composer_oracle():
    rng = random.Random(5555)
    done = mismatches = with_super = regenerated = 0
    ops = set()
    while done < 300:
        case = random_composition_case(rng)
        try:
            expected = SpliceOracle(case.files, case.refinements, case.selected).compose()
        except OracleDanglingSuper:
            regenerated += 1
            continue
        done += 1
        with_super += case.has_super
        ops.update(op for _, op, _ in case.refinements)
        pl = build_pl(case.files, case.ldl)
        result = check(pl, case.selected)[1]
        got = {a.relative_path: a.content for a in compose(pl, None, result)} if result.ok else None
        mismatches += got != expected
    share = with_super / done
    ok = mismatches == 0 and ops == {"replaces", "before", "after"} and 0.25 <= share <= 0.35
    record(5, "composer oracle equivalence", ok,
           f"300 fixtures, byte mismatches={mismatches}, ops={sorted(ops)}, include-super share={share:.0%}, "
           f"regenerated={regenerated}")


# 6 ---------------------------------------------------------------------------------

def test_criterion_6_round_trips():
    corpus_files = [p for base in (CORPUS, FIXTURES) for p in sorted(base.rglob("*"))
                    if p.suffix in (".xpt", ".java")]
    corpus_bad = 0
    for p in corpus_files:
        kind = D.kind_for(p)
        text = p.read_text(encoding="utf-8")
        root = parse_artifact(text, D, kind)
        corpus_bad += serialize_artifact(root, D, kind) != text or \
            parse_artifact(serialize_artifact(root, D, kind), D, kind) != root
    rng = random.Random(6)
    tree_bad = text_bad = ldl_bad = pcl_bad = 0
    for _ in range(500):
        tree = random_vr_tree(rng)
        tree_bad += parse_artifact(serialize_artifact(tree, D), D) != tree
        text = random_marked_text(rng)
        text_bad += serialize_artifact(parse_artifact(text, D), D) != text
        model = random_ldl_model(rng)
        ldl = format_ldl(model)
        ldl_bad += parse_ldl(ldl) != model or format_ldl(parse_ldl(ldl)) != ldl
        cfg = random_pcl_model(rng)
        pcl = format_pcl(cfg)
        pcl_bad += parse_pcl(pcl) != cfg or format_pcl(parse_pcl(pcl)) != pcl
    ok = not (corpus_bad or tree_bad or text_bad or ldl_bad or pcl_bad)
    record(6, "round-trip invariants", ok,
           f"corpus files={len(corpus_files)} failures={corpus_bad}; 500 VR trees failures={tree_bad}; "
           f"500 marked texts failures={text_bad}; 500 LDL failures={ldl_bad}; 500 PCL failures={pcl_bad}")


# 7 ---------------------------------------------------------------------------------

def test_criterion_7_determinism():
    roots = [CORPUS, FIXTURES / "stack3", FIXTURES / "helpers"]
    with tempfile.TemporaryDirectory() as tmp:
        tmp = Path(tmp)
        rng = random.Random(77)
        for i in range(20):
            case = random_composition_case(rng)
            pcl = f'generator R{i} {{ layers = "{case.selected[0]}"; }}\n'
            roots.append(write_tree(tmp / f"rand{i}", {**case.files, "layers.ldl": case.ldl, "r.pcl": pcl}))
        differing = []
        for root in roots:
            hashes = []
            for run in range(2):
                out = tmp / "out" / f"{root.name}-{run}"
                code, _ = _cli("compose", "--root", root, "--output", out)
                hashes.append((code, tree_hash(out) if out.exists() else None))
            if hashes[0] != hashes[1] or hashes[0][0] not in (0, 1):
                differing.append(root.name)
        graph_roots = [CORPUS, FIXTURES / "conflicts", FIXTURES / "stack3", FIXTURES / "helpers"]
        graph_diff = [r.name for r in graph_roots if _cli("graph", "--root", r) != _cli("graph", "--root", r)]
    record(7, "determinism", not differing and not graph_diff,
           f"{len(roots)} fixtures composed twice, differing trees={differing}; "
           f"graph output byte-identical on {len(graph_roots)} fixtures, differing={graph_diff}")


# 8 ---------------------------------------------------------------------------------

def test_criterion_8_stats_structure():
    code, out = _cli("stats", "--root", CORPUS, "--json")
    doc = json.loads(out)
    expected_cols = ["TLOC", "Number DEFINE", "Number refined DEFINE", "HLOC", "Number helper",
                     "Number refined helper"]
    rows = {r.pop("layer"): r for r in doc["rows"]}
    golden = json.loads((GOLDEN / "stats_factory.json").read_text())
    live = count_stats(CORPUS)
    table_header = _cli("stats", "--root", CORPUS)[1].splitlines()[0]
    cols_ok = doc["columns"] == expected_cols and [h for _, h in COLUMNS] == expected_cols \
        and all(c in table_header for c in expected_cols)
    ok = code == 0 and cols_ok and rows == golden == live
    record(8, "stats structure", ok,
           f"columns={doc['columns']}; values match committed counting-script golden={rows == golden}, "
           f"live oracle={rows == live}")


if __name__ == "__main__":
    import pytest
    code = pytest.main([__file__, "-q", "-p", "no:cacheprovider"])
    sys.exit(code)
