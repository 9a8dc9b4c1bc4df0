"""Independent oracles used by the tests.

The def-use oracle enumerates every CFG path from entry to exit, taking
each loop-back edge at most twice, and collects def-clear definition-to-use
pairs by replaying the path. It shares no code with the fixpoint analysis
it checks.
"""

from plancog.relations import LOOP_BACK, node_defs, node_uses


def brute_force_def_use(cfg, max_unrollings=2):
    """Return (chains, possibly_uninitialized) from exhaustive path walks."""
    succs = {n.id: [] for n in cfg.nodes}
    for src, dst, label in cfg.edges:
        succs[src].append((dst, label, (src, dst)))
    by_id = {n.id: n for n in cfg.nodes}
    chains = {}
    uninit = set()

    def replay(path):
        live = {}
        for nid in path:
            node = by_id[nid]
            for var in node_uses(node):
                if var in live:
                    chains.setdefault((var, by_id[live[var]].line), set()).add(node.line)
                else:
                    uninit.add((var, node.line))
            for var in node_defs(node):
                live[var] = nid

    def walk(node, path, back_counts):
        path.append(node)
        if node == cfg.exit:
            replay(path)
        else:
            for dst, label, edge in succs[node]:
                if label == LOOP_BACK:
                    taken = back_counts.get(edge, 0)
                    if taken >= max_unrollings:
                        continue
                    back_counts[edge] = taken + 1
                    walk(dst, path, back_counts)
                    back_counts[edge] = taken
                else:
                    walk(dst, path, back_counts)
        path.pop()

    walk(cfg.entry, [], {})
    for node in cfg.nodes:
        for var in node_defs(node):
            chains.setdefault((var, node.line), set())
    return chains, uninit
