import pytest

from oracles import brute_force_def_use
from plancog import frontend as fe
from plancog import relations as rel
from plancog.errors import AnalysisError


def _reachable(cfg, start, forward=True):
    adjacency = {}
    for src, dst, _ in cfg.edges:
        a, b = (src, dst) if forward else (dst, src)
        adjacency.setdefault(a, set()).add(b)
    seen = {start}
    frontier = [start]
    while frontier:
        for nxt in adjacency.get(frontier.pop(), ()):
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    return seen


def test_grey_repeat_loop_back_edge(grey):
    cfg = rel.build_cfg(grey)
    until = cfg.node_at(14)
    readln = cfg.node_at(8)
    assert until.kind == rel.COND
    assert (until.id, readln.id, rel.LOOP_BACK) in cfg.edges


def test_empty_program_single_edge():
    cfg = rel.build_cfg(fe.parse("PROGRAM P(input,output); BEGIN END."))
    assert len(cfg.nodes) == 2
    assert cfg.edges == [(cfg.entry, cfg.exit, rel.SEQ)]


def test_orange_loop_has_no_if_nodes(orange):
    cfg = rel.build_cfg(orange)
    if_nodes = [n for n in cfg.nodes if n.kind == rel.COND and isinstance(n.stmt, fe.If)]
    assert if_nodes == []


def test_cfg_reachability_invariants(corpus_sources):
    for src in corpus_sources.values():
        cfg = rel.build_cfg(fe.parse(src))
        ids = {n.id for n in cfg.nodes}
        assert _reachable(cfg, cfg.entry, forward=True) == ids
        assert _reachable(cfg, cfg.exit, forward=False) == ids


def test_if_nodes_have_true_and_false_edges(grey):
    cfg = rel.build_cfg(grey)
    for node in cfg.nodes:
        if node.kind == rel.COND and isinstance(node.stmt, fe.If):
            labels = sorted(label for _, label in cfg.succs(node.id))
            assert labels == ["false", "true"]


def test_loop_conditions_have_one_loop_back_path(corpus_sources):
    for src in corpus_sources.values():
        cfg = rel.build_cfg(fe.parse(src))
        for node in cfg.nodes:
            if node.kind != rel.COND or not isinstance(node.stmt, fe.LOOP_KINDS):
                continue
            incident = [e for e in cfg.edges
                        if rel.LOOP_BACK == e[2] and node.id in (e[0], e[1])]
            assert len(incident) == 1


# --- primes -----------------------------------------------------------------

def test_grey_prime_decomposition(grey):
    # frozen hand decomposition of the normalized fixture
    tree = rel.decompose_primes(rel.build_cfg(grey))
    assert tree.kind == "sequence"
    kinds = [(c.kind, c.lines) for c in tree.children]
    assert kinds == [("sequence", [5, 6]), ("iteration", [7, 14]),
                     ("sequence", [15, 16])]
    body = tree.children[1].children[0]
    assert [(c.kind, c.lines) for c in body.children] == [
        ("sequence", [8]), ("conditional", [9])]
    assert body.children[1].children[0].lines == [11, 12]


def test_single_assignment_prime_tree():
    program = fe.parse("PROGRAM P(input,output); VAR X: INTEGER; BEGIN X := 1; END.")
    tree = rel.decompose_primes(rel.build_cfg(program))
    assert tree.is_leaf() and tree.lines == [1]


def test_orange_iteration_is_pure_sequence(orange):
    tree = rel.decompose_primes(rel.build_cfg(orange))
    iteration = next(n for n in tree.walk() if n.kind == "iteration")
    body = iteration.children[0]
    assert body.is_leaf()
    assert body.lines == [8, 9, 10]


def test_prime_leaves_partition_simple_statements(corpus_sources):
    for src in corpus_sources.values():
        program = fe.parse(src)
        tree = rel.decompose_primes(rel.build_cfg(program))
        leaf_lines = [line for leaf in tree.leaves() for line in leaf.lines]
        expected = sorted(s.line for s in fe.simple_statements(program))
        assert sorted(leaf_lines) == expected
        assert len(leaf_lines) == len(set(leaf_lines))


def test_iteration_and_conditional_counts(corpus_sources):
    for src in corpus_sources.values():
        program = fe.parse(src)
        tree = rel.decompose_primes(rel.build_cfg(program))
        statements = list(fe.walk_statements(program.body))
        loops = sum(isinstance(s, fe.LOOP_KINDS) for s in statements)
        conds = sum(isinstance(s, fe.If) for s in statements)
        assert sum(n.kind == "iteration" for n in tree.walk()) == loops
        assert sum(n.kind == "conditional" for n in tree.walk()) == conds


# --- def-use ------------------------------------------------------------------

def test_grey_sum_chain(grey):
    # expected set computed by the exhaustive path oracle, then frozen
    du = rel.def_use(grey, rel.build_cfg(grey))
    assert du.chains[("sum", 5)] == {11, 15}


def test_use_before_definition_flagged():
    program = fe.parse("PROGRAM P(input,output); VAR X, Y: INTEGER;"
                       " BEGIN Y := X; END.")
    du = rel.def_use(program, rel.build_cfg(program))
    assert ("x", 1) in du.possibly_uninitialized


def test_orange_counter_updates_unconditionally(orange):
    du = rel.def_use(orange, rel.build_cfg(orange))
    assert 10 in du.chains[("count", 6)]


def test_grey_readln_definition_and_writeln_use(grey):
    du = rel.def_use(grey, rel.build_cfg(grey))
    assert ("num", 8) in du.definitions
    assert ("average", 16) in du.uses


def test_query_data_relation_grey(grey):
    # frozen from the fixture's def-use chains
    assert rel.query_relation("data", grey, 12) == {6, 15}


def test_query_control_relation_grey(grey):
    # frozen from build_cfg on the fixture
    assert rel.query_relation("control", grey, 8) == {6, 9, 14}


def test_query_data_single_statement():
    program = fe.parse("PROGRAM P(input,output); VAR X: INTEGER; BEGIN X := 1; END.")
    assert rel.query_relation("data", program, 1) == set()


def test_query_bad_line(grey):
    with pytest.raises(AnalysisError):
        rel.query_relation("control", grey, 999)


def test_chains_match_brute_force_oracle(corpus_sources):
    for src in corpus_sources.values():
        program = fe.parse(src)
        assert len(fe.simple_statements(program)) <= 12
        cfg = rel.build_cfg(program)
        du = rel.def_use(program, cfg)
        chains, uninit = brute_force_def_use(cfg)
        assert du.chains == chains
        assert set(du.possibly_uninitialized) == uninit


def test_every_use_chained_or_flagged(corpus_sources):
    sources = list(corpus_sources.values())
    sources.append("PROGRAM P(input,output); VAR X, Y: INTEGER; BEGIN Y := X; END.")
    for src in sources:
        program = fe.parse(src)
        du = rel.def_use(program, rel.build_cfg(program))
        chained = {(var, use) for (var, _), uses in du.chains.items()
                   for use in uses}
        flagged = set(du.possibly_uninitialized)
        for var, line in du.uses:
            assert (var, line) in chained or (var, line) in flagged


def test_determinism(corpus_sources):
    for src in corpus_sources.values():
        program = fe.parse(src)
        first = rel.def_use(program, rel.build_cfg(program))
        second = rel.def_use(fe.parse(src), rel.build_cfg(fe.parse(src)))
        assert first.chains == second.chains
        assert first.definitions == second.definitions
        one = rel.decompose_primes(rel.build_cfg(program))
        two = rel.decompose_primes(rel.build_cfg(fe.parse(src)))
        assert [(n.kind, n.lines) for n in one.walk()] == \
               [(n.kind, n.lines) for n in two.walk()]
