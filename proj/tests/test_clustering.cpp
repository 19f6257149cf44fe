#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kwass/clustering.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <set>

using namespace kwass;
using doctest::Approx;

namespace
{
	Matrix<double> three_point()
	{
		Matrix<double> d(3, 3);
		d << 0, 1, 5, 1, 0, 5, 5, 5, 0;
		return d;
	}

	ContingencyTable reference_table()
	{
		std::vector<int> labels;
		std::vector<std::string> truth;
		const auto add = [&](int cluster, const std::string &cls, int count) {
			for (int i = 0; i < count; ++i)
			{
				labels.push_back(cluster);
				truth.push_back(cls);
			}
		};
		add(0, "clean", 658);
		add(0, "noisy", 8);
		add(1, "clean", 230);
		add(1, "noisy", 268);
		return contingency(labels, truth);
	}

	ContingencyTable table(const Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> &counts)
	{
		ContingencyTable t;
		t.counts = counts;
		for (Eigen::Index i = 0; i < counts.rows(); ++i)
			t.row_labels.push_back(int(i));
		for (Eigen::Index j = 0; j < counts.cols(); ++j)
			t.col_labels.push_back("c" + std::to_string(j));
		return t;
	}

	Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> m2(std::int64_t a, std::int64_t b, std::int64_t c, std::int64_t d)
	{
		Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> m(2, 2);
		m << a, b, c, d;
		return m;
	}

	std::set<std::set<int>> partition(const std::vector<int> &labels, const std::vector<int> &item_of = {})
	{
		std::map<int, std::set<int>> groups;
		for (std::size_t i = 0; i < labels.size(); ++i)
			groups[labels[i]].insert(item_of.empty() ? int(i) : item_of[i]);
		std::set<std::set<int>> out;
		for (auto &[_, g] : groups)
			out.insert(g);
		return out;
	}

	Matrix<double> random_distances(std::mt19937_64 &rng, int n)
	{
		std::normal_distribution<double> g;
		Matrix<double> pts(n, 2);
		for (Eigen::Index i = 0; i < pts.size(); ++i)
			pts.data()[i] = g(rng);
		Matrix<double> d(n, n);
		for (int i = 0; i < n; ++i)
			for (int j = 0; j < n; ++j)
				d(i, j) = (pts.row(i) - pts.row(j)).norm();
		return d;
	}
} // namespace

TEST_CASE("two items merge once")
{
	Matrix<double> d(2, 2);
	d << 0, 2.5, 2.5, 0;
	const auto t = agglomerate(d);
	REQUIRE(t.merges.size() == 1);
	CHECK(t.merges[0].height == 2.5);
	CHECK(t.merges[0].size == 2);
}

TEST_CASE("three-point average linkage by hand")
{
	const auto t = agglomerate(three_point(), Linkage::average);
	REQUIRE(t.merges.size() == 2);
	CHECK(t.merges[0].left == 0);
	CHECK(t.merges[0].right == 1);
	CHECK(t.merges[0].height == 1);
	CHECK(t.merges[1].left == 2);
	CHECK(t.merges[1].right == 3);
	CHECK(t.merges[1].height == 5);
	CHECK(cut(t, 2) == std::vector<int>{0, 0, 1});
	CHECK(cut(t, 1) == std::vector<int>{0, 0, 0});
	CHECK(cut(t, 3).size() == 3);
	CHECK_THROWS_AS(cut(t, 0), InputError);
	CHECK_THROWS_AS(cut(t, 4), InputError);
}

TEST_CASE("ties merge the lowest-index pair first")
{
	// all four points pairwise equidistant: (0,1) first, then the merged slot 0 with 2, then 3
	Matrix<double> d = Matrix<double>::Ones(4, 4);
	d.diagonal().setZero();
	for (int rep = 0; rep < 3; ++rep)
	{
		const auto t = agglomerate(d, Linkage::average);
		CHECK(t.merges[0].left == 0);
		CHECK(t.merges[0].right == 1);
		CHECK(t.merges[1].left == 2);
		CHECK(t.merges[1].right == 4);
		CHECK(t.merges[2].left == 3);
		CHECK(t.merges[2].right == 5);
	}

	// a tie between (1,2) and (0,3): the lexicographically smaller pair (0,3) wins
	Matrix<double> e(4, 4);
	e << 0, 5, 5, 2, 5, 0, 2, 5, 5, 2, 0, 5, 2, 5, 5, 0;
	const auto t = agglomerate(e, Linkage::average);
	CHECK(t.merges[0].left == 0);
	CHECK(t.merges[0].right == 3);
	CHECK(t.merges[1].left == 1);
	CHECK(t.merges[1].right == 2);
}

TEST_CASE("NaN and bad shapes are rejected")
{
	Matrix<double> d = three_point();
	d(0, 2) = d(2, 0) = std::nan("");
	CHECK_THROWS_AS(agglomerate(d), InputError);
	CHECK_THROWS_AS(agglomerate(Matrix<double>::Zero(1, 1)), InputError);
	CHECK_THROWS_AS(agglomerate(Matrix<double>::Zero(2, 3)), InputError);
}

TEST_CASE("dendrogram invariants on random inputs")
{
	std::mt19937_64 rng(1);
	for (int t = 0; t < 30; ++t)
		for (Linkage l : {Linkage::average, Linkage::complete, Linkage::single})
		{
			const int n = 2 + t % 20;
			const auto tree = agglomerate(random_distances(rng, n), l);
			REQUIRE(tree.merges.size() == std::size_t(n - 1));
			std::vector<int> used(2 * n - 1, 0);
			for (std::size_t k = 0; k < tree.merges.size(); ++k)
			{
				const auto &m = tree.merges[k];
				CHECK(m.left < n + std::int64_t(k));
				CHECK(m.right < n + std::int64_t(k));
				++used[m.left];
				++used[m.right];
				if (k > 0)
					CHECK(m.height >= tree.merges[k - 1].height);
			}
			CHECK(tree.merges.back().size == n);
			// every node except the root is merged exactly once
			CHECK(std::count(used.begin(), used.end() - 1, 1) == 2 * n - 2);
			auto order = tree.leaf_order();
			std::sort(order.begin(), order.end());
			std::vector<std::int64_t> expect(n);
			std::iota(expect.begin(), expect.end(), 0);
			CHECK(order == expect);
		}
}

TEST_CASE("cuts are nested and numbered by size")
{
	std::mt19937_64 rng(2);
	for (int t = 0; t < 20; ++t)
	{
		const int n = 3 + t;
		const auto tree = agglomerate(random_distances(rng, n));
		for (int k = 2; k <= n; ++k)
		{
			const auto fine = cut(tree, k), coarse = cut(tree, k - 1);
			CHECK(*std::max_element(fine.begin(), fine.end()) == k - 1);
			for (int i = 0; i < n; ++i)
				for (int j = 0; j < n; ++j)
					if (fine[i] == fine[j])
						CHECK(coarse[i] == coarse[j]);
			std::vector<int> sizes(k, 0);
			for (int v : fine)
				++sizes[v];
			CHECK(std::is_sorted(sizes.rbegin(), sizes.rend()));
		}
		const auto singletons = cut(tree, n);
		CHECK(std::set<int>(singletons.begin(), singletons.end()).size() == std::size_t(n));
	}
}

TEST_CASE("agglomeration is permutation-equivariant")
{
	std::mt19937_64 rng(3);
	for (int t = 0; t < 20; ++t)
	{
		const int n = 4 + t % 10;
		const Matrix<double> d = random_distances(rng, n);
		std::vector<int> perm(n);
		std::iota(perm.begin(), perm.end(), 0);
		std::shuffle(perm.begin(), perm.end(), rng);
		Matrix<double> p(n, n);
		for (int i = 0; i < n; ++i)
			for (int j = 0; j < n; ++j)
				p(i, j) = d(perm[i], perm[j]);
		for (Linkage l : {Linkage::average, Linkage::complete, Linkage::single})
		{
			const auto a = agglomerate(d, l), b = agglomerate(p, l);
			for (int k = 1; k <= n; ++k)
				CHECK(partition(cut(a, k)) == partition(cut(b, k), perm));
		}
	}
}

TEST_CASE("contingency tables")
{
	const auto diag = contingency({0, 0, 1, 1, 1}, {"a", "a", "b", "b", "b"});
	CHECK(diag.counts == m2(2, 0, 0, 3));
	CHECK(diag.total() == 5);

	const auto one = contingency({4, 4, 4}, {"x", "y", "x"});
	CHECK(one.counts.rows() == 1);
	CHECK(one.row_labels == std::vector<int>{4});
	CHECK(one.col_labels == std::vector<std::string>{"x", "y"});

	const auto pub = reference_table();
	CHECK(pub.counts == m2(658, 8, 230, 268));
	CHECK(pub.col_labels == std::vector<std::string>{"clean", "noisy"});
	CHECK(pub.total() == 1164);
	CHECK_THROWS_AS(contingency({0, 1}, {"a"}), InputError);
}

TEST_CASE("chi-square")
{
	CHECK(chi_square(table(m2(10, 20, 30, 60))) == Approx(0).scale(1));
	CHECK(chi_square(table(m2(5, 0, 0, 5))) == Approx(10));
	const double pub = chi_square(reference_table());
	CHECK(std::abs(pub - 436) <= 0.5);
	CHECK(pub == Approx(oracle::chi_square({{658, 8}, {230, 268}})).epsilon(1e-12));
	CHECK_THROWS_AS(chi_square(table(m2(0, 0, 3, 4))), InputError);

	std::mt19937_64 rng(4);
	std::uniform_int_distribution<int> c(1, 50);
	for (int t = 0; t < 100; ++t)
	{
		Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> m(2 + t % 3, 2 + t % 2);
		for (Eigen::Index i = 0; i < m.size(); ++i)
			m.data()[i] = c(rng);
		const double v = chi_square(table(m));
		Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> tr = m.transpose();
		CHECK(chi_square(table(tr)) == Approx(v).epsilon(1e-12));
		Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> swapped = m.colwise().reverse();
		CHECK(chi_square(table(swapped)) == Approx(v).epsilon(1e-12));

		// rank-1 tables are independent
		Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> r(m.rows());
		Eigen::Matrix<std::int64_t, 1, Eigen::Dynamic> s(m.cols());
		for (Eigen::Index i = 0; i < r.size(); ++i)
			r(i) = c(rng);
		for (Eigen::Index j = 0; j < s.size(); ++j)
			s(j) = c(rng);
		CHECK(std::abs(chi_square(table(r * s))) <= 1e-9);
	}
}

TEST_CASE("balanced 2x2 chi-square peaks at n")
{
	// brute force over all 2x2 tables with total n = 8 and balanced column sums
	const int n = 8;
	double best = 0;
	for (int a = 0; a <= 4; ++a)
		for (int b = 0; b <= 4; ++b)
		{
			const auto m = m2(a, b, 4 - a, 4 - b);
			if ((m.row(0).sum() == 0) || (m.row(1).sum() == 0))
				continue;
			best = std::max(best, chi_square(table(m)));
		}
	CHECK(best == Approx(double(n)));
}

TEST_CASE("prediction rates")
{
	const auto pub = reference_table();
	const auto r = prediction_rates(pub, 1, 1);
	CHECK(std::abs(100 * r.noisy_rate - 97.10) <= 0.01);
	CHECK(std::abs(100 * r.clean_rate - 74.10) <= 0.01);
	CHECK(std::abs(100 * r.overall - 79.6) <= 0.05);
	CHECK(r.noisy_rate == Approx(268.0 / 276));
	CHECK(r.clean_rate == Approx(658.0 / 888));
	CHECK(r.overall == Approx(926.0 / 1164));

	// the cluster that is enriched for noisy items is the second one
	const double f0 = double(pub.counts(0, 1)) / double(pub.counts.row(0).sum());
	const double f1 = double(pub.counts(1, 1)) / double(pub.counts.row(1).sum());
	CHECK(f1 > f0);

	const auto perfect = prediction_rates(table(m2(7, 0, 0, 9)), 1, 1);
	CHECK(perfect.noisy_rate == 1.0);
	CHECK(perfect.clean_rate == 1.0);
	CHECK(perfect.overall == 1.0);
	const auto flat = prediction_rates(table(m2(1, 1, 1, 1)), 1, 1);
	CHECK(flat.noisy_rate == 0.5);
	CHECK(flat.clean_rate == 0.5);
	CHECK(flat.overall == 0.5);

	Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> wide(2, 3);
	wide << 1, 2, 3, 4, 5, 6;
	CHECK_THROWS_AS(prediction_rates(table(wide), 0, 0), InputError);
}

TEST_CASE("linkage names")
{
	for (Linkage l : {Linkage::average, Linkage::complete, Linkage::single})
		CHECK(parse_linkage(to_string(l)) == l);
	CHECK_THROWS_AS(parse_linkage("ward"), InputError);
}
