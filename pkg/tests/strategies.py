from hypothesis import strategies as st

from conftest import random_poset


@st.composite
def posets(draw, max_size: int = 5):
    n = draw(st.integers(0, max_size))
    pairs = draw(st.lists(st.tuples(st.integers(0, max(n - 1, 0)), st.integers(0, max(n - 1, 0))), max_size=8))
    return random_poset(pairs, n)


@st.composite
def presentations(draw, max_questions: int = 6, max_parties: int = 3):
    from boxtopos.logic import BoxPresentation

    n_parties = draw(st.integers(0, max_parties))
    parties = [f"P{i}" for i in range(n_parties)]
    n_q = draw(st.integers(0, max_questions if n_parties else 0))
    owners = [draw(st.sampled_from(parties)) for _ in range(n_q)]
    questions = [f"q{k}" for k in range(n_q)]
    return BoxPresentation(tuple(parties), tuple(questions), dict(zip(questions, owners)))
