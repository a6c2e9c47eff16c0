import numpy as np
import pytest

from vqaworkbench.embeddings import (
    EmbeddingFormatError,
    EmbeddingTable,
    EmptyAnswerError,
    embed_answer,
    load_embedding_table,
)


def write_glove(tmp_path, lines):
    path = tmp_path / "vectors.txt"
    path.write_text("\n".join(lines) + "\n")
    return path


class TestLoadTable:
    def test_basic(self, tmp_path):
        path = write_glove(
            tmp_path,
            ["cat 1 0 0 0", "dog 0 1 0 0", "park 0 0 1 0"],
        )
        table = load_embedding_table(path)
        assert len(table) == 3 and table.dim == 4
        assert np.allclose(table["cat"], [1, 0, 0, 0])

    def test_wrong_arity_names_line(self, tmp_path):
        path = write_glove(tmp_path, ["cat 1 0 0 0", "dog 0 1 0"])
        with pytest.raises(EmbeddingFormatError) as err:
            load_embedding_table(path)
        assert err.value.line == 2

    def test_dim_mismatch(self, tmp_path):
        path = write_glove(tmp_path, ["cat 1 0 0"])
        with pytest.raises(EmbeddingFormatError):
            load_embedding_table(path, expected_dim=4)

    def test_duplicates_keep_first_and_count(self, tmp_path):
        path = write_glove(tmp_path, ["cat 1 0", "cat 9 9", "dog 0 1"])
        table = load_embedding_table(path)
        assert table.duplicates == 1
        assert np.allclose(table["cat"], [1, 0])


class TestEmbedAnswer:
    def test_single_word_is_table_vector(self, tiny_table):
        av = embed_answer(tiny_table, "cat")
        assert np.array_equal(av.vector, tiny_table["cat"])
        assert av.oov_fraction == 0.0

    def test_mean_pooling(self, tiny_table):
        av = embed_answer(tiny_table, "black cat")
        expected = (tiny_table["black"] + tiny_table["cat"]) / 2
        assert np.allclose(av.vector, expected)

    def test_oov_word_skipped(self, tiny_table):
        av = embed_answer(tiny_table, "zzqx cat")
        assert np.array_equal(av.vector, tiny_table["cat"])
        assert av.oov_fraction == 0.5

    def test_all_oov_is_zero_vector(self, tiny_table):
        av = embed_answer(tiny_table, "zzqx qqzz")
        assert not av.vector.any()
        assert av.oov_fraction == 1.0

    def test_empty_errors(self, tiny_table):
        with pytest.raises(EmptyAnswerError):
            embed_answer(tiny_table, "   ")

    def test_word_order_invariant(self, tiny_table):
        a = embed_answer(tiny_table, "black cat").vector
        b = embed_answer(tiny_table, "cat black").vector
        assert np.array_equal(a, b)

    def test_linear_in_table_scale(self, tiny_table):
        scaled = EmbeddingTable({w: 3.0 * tiny_table[w] for w in tiny_table.words()}, dim=4)
        a = embed_answer(tiny_table, "black cat").vector
        b = embed_answer(scaled, "black cat").vector
        assert np.allclose(b, 3.0 * a)

    def test_zero_vector_iff_all_oov(self, tiny_table):
        for text in ("cat", "zzqx cat", "black dog park"):
            av = embed_answer(tiny_table, text)
            assert av.vector.any() and av.oov_fraction < 1.0
        av = embed_answer(tiny_table, "zzqx")
        assert not av.vector.any() and av.oov_fraction == 1.0
