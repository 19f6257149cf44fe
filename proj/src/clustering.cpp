#include "kwass/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace kwass
{
	std::string_view to_string(Linkage linkage)
	{
		switch (linkage)
		{
		case Linkage::average:
			return "average";
		case Linkage::complete:
			return "complete";
		case Linkage::single:
			return "single";
		}
		return "unknown";
	}

	Linkage parse_linkage(std::string_view name)
	{
		if (name == "average")
			return Linkage::average;
		if (name == "complete")
			return Linkage::complete;
		if (name == "single")
			return Linkage::single;
		throw InputError("unknown linkage '" + std::string(name) + "'");
	}

	std::vector<std::int64_t> Dendrogram::leaf_order() const
	{
		std::vector<std::int64_t> order;
		if (leaves == 0)
			return order;
		if (merges.empty())
		{
			order.push_back(0);
			return order;
		}
		std::vector<std::int64_t> stack{leaves + static_cast<std::int64_t>(merges.size()) - 1};
		while (!stack.empty())
		{
			const std::int64_t node = stack.back();
			stack.pop_back();
			if (node < leaves)
			{
				order.push_back(node);
				continue;
			}
			const Merge &m = merges[node - leaves];
			stack.push_back(m.right);
			stack.push_back(m.left);
		}
		return order;
	}

	Dendrogram agglomerate(const Matrix<double> &input, Linkage linkage)
	{
		const Eigen::Index n = input.rows();
		detail::require(input.cols() == n, "agglomerate: distance matrix is not square");
		detail::require(n >= 2, "agglomerate: need at least two items");
		for (Eigen::Index i = 0; i < n; ++i)
			for (Eigen::Index j = 0; j < n; ++j)
				detail::require(!std::isnan(input(i, j)), "agglomerate: distance matrix contains NaN");

		Matrix<double> d = (input + input.transpose()) / 2.0;
		std::vector<bool> active(n, true);
		std::vector<std::int64_t> node(n), size(n, 1);
		std::iota(node.begin(), node.end(), 0);

		Dendrogram tree;
		tree.leaves = n;
		tree.linkage = linkage;
		tree.merges.reserve(n - 1);

		for (Eigen::Index step = 0; step + 1 < n; ++step)
		{
			Eigen::Index a = -1, b = -1;
			double best = 0;
			for (Eigen::Index i = 0; i < n; ++i)
			{
				if (!active[i])
					continue;
				for (Eigen::Index j = i + 1; j < n; ++j)
				{
					if (!active[j])
						continue;
					if (a < 0 || d(i, j) < best)
					{
						best = d(i, j);
						a = i;
						b = j;
					}
				}
			}

			const std::int64_t na = size[a], nb = size[b];
			for (Eigen::Index k = 0; k < n; ++k)
			{
				if (!active[k] || k == a || k == b)
					continue;
				double v = 0;
				switch (linkage)
				{
				case Linkage::average:
					v = (double(na) * d(a, k) + double(nb) * d(b, k)) / double(na + nb);
					break;
				case Linkage::complete:
					v = std::max(d(a, k), d(b, k));
					break;
				case Linkage::single:
					v = std::min(d(a, k), d(b, k));
					break;
				}
				d(a, k) = d(k, a) = v;
			}

			tree.merges.push_back({std::min(node[a], node[b]), std::max(node[a], node[b]), best, na + nb});
			active[b] = false;
			size[a] = na + nb;
			node[a] = n + step;
		}
		return tree;
	}

	Dendrogram agglomerate(const DistanceMatrix &d, Linkage linkage)
	{
		d.validate();
		return agglomerate(d.values, linkage);
	}

	namespace
	{
		struct DisjointSets
		{
			std::vector<std::int64_t> parent;
			explicit DisjointSets(std::int64_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
			std::int64_t find(std::int64_t x)
			{
				while (parent[x] != x)
					x = parent[x] = parent[parent[x]];
				return x;
			}
			void unite(std::int64_t a, std::int64_t b)
			{
				a = find(a);
				b = find(b);
				if (a != b)
					parent[std::max(a, b)] = std::min(a, b);
			}
		};
	} // namespace

	std::vector<int> cut(const Dendrogram &tree, int k)
	{
		const std::int64_t n = tree.leaves;
		detail::require(k >= 1 && k <= n, "cut: k must be between 1 and " + std::to_string(n));
		detail::require(static_cast<std::int64_t>(tree.merges.size()) == n - 1, "cut: dendrogram is incomplete");

		// node -> representative leaf
		std::vector<std::int64_t> rep(n + tree.merges.size());
		std::iota(rep.begin(), rep.begin() + n, 0);
		DisjointSets sets(n);
		const std::int64_t applied = n - k;
		for (std::int64_t m = 0; m < static_cast<std::int64_t>(tree.merges.size()); ++m)
		{
			const Merge &mg = tree.merges[m];
			rep[n + m] = rep[mg.left];
			if (m < applied)
				sets.unite(rep[mg.left], rep[mg.right]);
		}

		// root leaf (smallest leaf in each cluster) -> members
		std::map<std::int64_t, std::int64_t> cluster_size;
		for (std::int64_t i = 0; i < n; ++i)
			++cluster_size[sets.find(i)];

		std::vector<std::pair<std::int64_t, std::int64_t>> order(cluster_size.begin(), cluster_size.end());
		std::stable_sort(order.begin(), order.end(), [](const auto &x, const auto &y) {
			if (x.second != y.second)
				return x.second > y.second;
			return x.first < y.first;
		});
		std::map<std::int64_t, int> id;
		for (std::size_t c = 0; c < order.size(); ++c)
			id[order[c].first] = static_cast<int>(c);

		std::vector<int> labels(n);
		for (std::int64_t i = 0; i < n; ++i)
			labels[i] = id[sets.find(i)];
		return labels;
	}

	ContingencyTable contingency(const std::vector<int> &labels, const std::vector<std::string> &truth)
	{
		detail::require(labels.size() == truth.size(), "contingency: " + std::to_string(labels.size()) + " labels but " +
														   std::to_string(truth.size()) + " truth values");
		ContingencyTable t;
		std::map<int, int> rows;
		std::map<std::string, int> cols;
		for (int l : labels)
			rows.emplace(l, 0);
		for (const auto &c : truth)
			cols.emplace(c, 0);
		for (auto &[label, index] : rows)
		{
			index = static_cast<int>(t.row_labels.size());
			t.row_labels.push_back(label);
		}
		for (auto &[label, index] : cols)
		{
			index = static_cast<int>(t.col_labels.size());
			t.col_labels.push_back(label);
		}
		t.counts.setZero(rows.size(), cols.size());
		for (std::size_t i = 0; i < labels.size(); ++i)
			++t.counts(rows[labels[i]], cols[truth[i]]);
		return t;
	}

	double chi_square(const ContingencyTable &table)
	{
		const auto &c = table.counts;
		detail::require(c.size() > 0, "chi_square: empty table");
		detail::require((c.array() >= 0).all(), "chi_square: negative counts");
		const Eigen::VectorXd rows = c.cast<double>().rowwise().sum();
		const Eigen::RowVectorXd cols = c.cast<double>().colwise().sum();
		const double total = rows.sum();
		detail::require((rows.array() > 0).all(), "chi_square: a row total is zero");
		detail::require((cols.array() > 0).all(), "chi_square: a column total is zero");

		double stat = 0;
		for (Eigen::Index i = 0; i < c.rows(); ++i)
			for (Eigen::Index j = 0; j < c.cols(); ++j)
			{
				const double expected = rows(i) * cols(j) / total;
				const double diff = double(c(i, j)) - expected;
				stat += diff * diff / expected;
			}
		return stat;
	}

	PredictionRates prediction_rates(const ContingencyTable &table, int noisy_row, int noisy_col)
	{
		const auto &c = table.counts;
		detail::require(c.rows() == 2 && c.cols() == 2, "prediction_rates: table must be 2x2");
		detail::require(noisy_row >= 0 && noisy_row < 2 && noisy_col >= 0 && noisy_col < 2,
						"prediction_rates: row/column index out of range");
		const int clean_row = 1 - noisy_row;
		const int clean_col = 1 - noisy_col;
		const double noisy_total = double(c(0, noisy_col) + c(1, noisy_col));
		const double clean_total = double(c(0, clean_col) + c(1, clean_col));
		detail::require(noisy_total > 0 && clean_total > 0, "prediction_rates: a class has no members");

		PredictionRates r;
		r.noisy_rate = double(c(noisy_row, noisy_col)) / noisy_total;
		r.clean_rate = double(c(clean_row, clean_col)) / clean_total;
		r.overall = double(c(noisy_row, noisy_col) + c(clean_row, clean_col)) / double(table.total());
		return r;
	}
} // namespace kwass
