#pragma once

#include "kwass/divergence.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace kwass
{
	enum class Linkage
	{
		average,
		complete,
		single
	};

	std::string_view to_string(Linkage linkage);
	Linkage parse_linkage(std::string_view name);

	/// One agglomeration step. Leaves are nodes 0..n-1; the cluster created by
	/// merge k is node n + k.
	struct Merge
	{
		std::int64_t left = 0;
		std::int64_t right = 0;
		double height = 0;
		std::int64_t size = 0;
	};

	struct Dendrogram
	{
		std::int64_t leaves = 0;
		Linkage linkage = Linkage::average;
		std::vector<Merge> merges;

		/// Leaf order of a depth-first walk (left child first), for heatmap ordering.
		std::vector<std::int64_t> leaf_order() const;
	};

	/// Lance-Williams agglomeration over precomputed dissimilarities. Each cluster
	/// lives in the slot of its smallest leaf index; among equally close pairs the
	/// lexicographically smallest slot pair merges first.
	Dendrogram agglomerate(const Matrix<double> &d, Linkage linkage = Linkage::average);
	Dendrogram agglomerate(const DistanceMatrix &d, Linkage linkage = Linkage::average);

	/// Flat clustering with k clusters obtained by undoing the last k-1 merges.
	/// Clusters are numbered by size (largest first), ties by smallest leaf index.
	std::vector<int> cut(const Dendrogram &tree, int k);

	struct ContingencyTable
	{
		std::vector<int> row_labels;		   // cluster ids
		std::vector<std::string> col_labels; // truth classes
		Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic> counts;

		std::int64_t total() const { return counts.sum(); }
	};

	/// Rows are the distinct cluster ids in increasing order; columns the distinct
	/// truth classes in lexicographic order.
	ContingencyTable contingency(const std::vector<int> &labels, const std::vector<std::string> &truth);

	/// Pearson chi-square without continuity correction.
	double chi_square(const ContingencyTable &table);

	struct PredictionRates
	{
		double noisy_rate = 0;
		double clean_rate = 0;
		double overall = 0;
	};

	/// For a 2x2 table: hit rate within the noisy class, within the clean class, and overall,
	/// where the noisy cluster is predicted noisy and the other cluster clean.
	PredictionRates prediction_rates(const ContingencyTable &table, int noisy_row, int noisy_col);
} // namespace kwass
