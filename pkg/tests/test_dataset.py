import math

import pytest

from citefit.dataset import CountDataset, load_counts, tail_ccdf, truncate
from citefit.errors import EmptyDatasetError, EmptyTailError, ParseError
from citefit.kernels import DiscreteDistribution, HookedPowerLawParams


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text, encoding="utf-8")
    return p


class TestLoadCounts:
    def test_zero_drop(self, tmp_path):
        ds = load_counts(write(tmp_path, "a.txt", "3\n0\n7"), "plain")
        assert ds.counts == (3, 7)
        assert ds.n == 2
        assert ds.zeros_dropped == 1

    def test_minimal(self, tmp_path):
        ds = load_counts(write(tmp_path, "b.txt", "1"), "plain")
        assert ds.counts == (1,)
        assert ds.n == 1

    def test_negative_is_parse_error_with_line(self, tmp_path):
        with pytest.raises(ParseError, match="line 1"):
            load_counts(write(tmp_path, "c.txt", "-2"), "plain")

    def test_non_integer_names_line(self, tmp_path):
        with pytest.raises(ParseError, match="line 2"):
            load_counts(write(tmp_path, "d.txt", "5\nfoo\n2"), "plain")

    def test_all_zeros_is_empty(self, tmp_path):
        with pytest.raises(EmptyDatasetError):
            load_counts(write(tmp_path, "e.txt", "0\n0\n"), "plain")

    def test_trailing_newline_ok(self, tmp_path):
        ds = load_counts(write(tmp_path, "f.txt", "4\n2\n"), "plain")
        assert ds.counts == (4, 2)

    def test_csv(self, tmp_path):
        ds = load_counts(write(tmp_path, "g.csv", "citations\n3\n0\n9\n"), "csv")
        assert ds.counts == (3, 9)
        assert ds.zeros_dropped == 1

    def test_csv_extra_columns(self, tmp_path):
        text = "id,citations\na,5\nb,1\n"
        ds = load_counts(write(tmp_path, "h.csv", text), "csv")
        assert ds.counts == (5, 1)

    def test_csv_missing_column(self, tmp_path):
        with pytest.raises(ParseError):
            load_counts(write(tmp_path, "i.csv", "cites\n3\n"), "csv")

    def test_order_preserved(self, tmp_path):
        ds = load_counts(write(tmp_path, "j.txt", "9\n1\n0\n5"), "plain")
        assert ds.counts == (9, 1, 5)


class TestTruncate:
    def test_filter(self):
        view = truncate(CountDataset((1, 2, 5, 5, 9)), 5)
        assert view.retained == (5, 5, 9)
        assert view.n_tail == 3

    def test_identity_at_one(self):
        ds = CountDataset((1, 2, 3))
        assert truncate(ds, 1).retained == (1, 2, 3)

    def test_empty_tail(self):
        with pytest.raises(EmptyTailError):
            truncate(CountDataset((1, 2)), 10)

    def test_composition_equals_max(self):
        ds = CountDataset((1, 2, 3, 7, 9, 20, 4))
        for a, b in [(2, 5), (5, 2), (3, 3), (1, 9)]:
            once = truncate(ds, max(a, b)).retained
            twice = truncate(CountDataset(truncate(ds, a).retained), b).retained
            assert once == twice


class TestTailCcdf:
    def test_direct_counts(self):
        pairs = tail_ccdf(truncate(CountDataset((2, 2, 4)), 2))
        assert pairs == [(2, 1.0), (4, pytest.approx(1 / 3))]

    def test_singleton(self):
        assert tail_ccdf(truncate(CountDataset((7,)), 1)) == [(7, 1.0)]

    def test_monotone_and_bounded(self):
        pairs = tail_ccdf(truncate(CountDataset((1, 1, 2, 3, 5, 8, 8, 13)), 1))
        probs = [p for _, p in pairs]
        assert probs[0] == 1.0
        assert all(0 < p <= 1 for p in probs)
        assert all(a > b for a, b in zip(probs, probs[1:]))

    def test_dkw_band_against_model(self):
        # 1000 draws from the model; empirical CCDF must stay inside the
        # 99% Dvoretzky-Kiefer-Wolfowitz band around the analytic CCDF.
        dist = DiscreteDistribution(HookedPowerLawParams(3.0, 10.0), 1)
        sample = dist.sample(1000, seed=2024)
        view = truncate(CountDataset(tuple(int(v) for v in sample)), 1)
        eps = math.sqrt(math.log(2 / 0.01) / (2 * view.n_tail))
        for value, emp in tail_ccdf(view):
            assert abs(emp - dist.ccdf(value)) <= eps
