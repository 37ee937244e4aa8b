"""Hypothesis strategies shared by the property tests."""
from hypothesis import strategies as st

from collapse_lab.hf import EMPTY, canon
from collapse_lab.trees import FiniteTree


def hf_sets(max_leaves: int = 12):
    return st.recursive(
        st.just(EMPTY),
        lambda children: st.lists(children, max_size=4).map(canon),
        max_leaves=max_leaves,
    )


@st.composite
def trees(draw, max_nodes: int = 20):
    n = draw(st.integers(1, max_nodes))
    seqs = [()]
    for i in range(1, n):
        parent = seqs[draw(st.integers(0, i - 1))]
        seqs.append(parent + (draw(st.integers(0, 2)),))
    return FiniteTree.from_sequences(seqs)


@st.composite
def dags(draw, max_nodes: int = 12):
    """(n, edges) with edges (i, j) only for i < j, so acyclic."""
    n = draw(st.integers(1, max_nodes))
    pairs = [(i, j) for j in range(n) for i in range(j)]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=3 * n)) if pairs else []
    return n, chosen
