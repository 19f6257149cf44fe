#pragma once

#include "kwass/clustering.hpp"
#include "kwass/divergence.hpp"
#include "kwass/texture.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace kwass::io
{
	/// Shortest round-trip-safe form with 17 significant digits.
	std::string format_real(double v);

	struct CsvTable
	{
		std::vector<std::string> header;
		std::vector<std::vector<std::string>> rows;
	};

	/// Plain comma-separated text, no quoting. Blank lines are skipped, fields trimmed.
	CsvTable parse_csv(const std::string &text, bool has_header = true);
	CsvTable read_csv(const std::filesystem::path &path, bool has_header = true);
	double parse_real(const std::string &field, const std::string &context);

	std::string read_text(const std::filesystem::path &path);
	/// Writes to a temporary sibling and renames it into place.
	void write_text_atomic(const std::filesystem::path &path, const std::string &content);

	// distance matrices: CSV header = labels, then a square numeric body
	std::string distance_matrix_csv(const DistanceMatrix &d);
	nlohmann::json distance_matrix_json(const DistanceMatrix &d);
	DistanceMatrix parse_distance_matrix_csv(const std::string &text);
	DistanceMatrix read_distance_matrix(const std::filesystem::path &path);

	// flat cluster labels: "id,label"
	std::string labels_csv(const std::vector<std::string> &ids, const std::vector<int> &labels);
	/// Two-column CSV with a header; returns (id, value) pairs in file order.
	std::vector<std::pair<std::string, std::string>> read_id_value_csv(const std::filesystem::path &path);

	nlohmann::json dendrogram_json(const Dendrogram &tree, const std::vector<std::string> &labels);

	struct EvalReport
	{
		ContingencyTable table;
		double chi_square = 0;
		PredictionRates rates;
		int noisy_row = 0;
		int noisy_col = 0;
	};
	nlohmann::json eval_report_json(const EvalReport &report);

	// texture features
	std::string features_csv(const std::vector<std::string> &ids, const std::vector<FeatureVector> &rows);

	/// One sample set per row: first column is the id, the remaining columns are
	/// scalar samples (n = columns - 1, d = 1).
	std::vector<SampleSet<double>> sets_from_wide(const CsvTable &table);
	/// One sample per row: first column is the set id, the rest are coordinates.
	/// Rows sharing an id form one set; sets appear in order of first occurrence.
	std::vector<SampleSet<double>> sets_from_long(const CsvTable &table);
	std::string sets_wide_csv(const std::vector<SampleSet<double>> &sets);

	// images: 8/16-bit grayscale PNG, or a CSV grid of intensities without header
	GrayImage load_image(const std::filesystem::path &path);
	GrayImage load_png(const std::filesystem::path &path);
	GrayImage load_csv_image(const std::filesystem::path &path);
	void write_png_gray(const std::filesystem::path &path, const Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic> &px,
						int bit_depth);
} // namespace kwass::io
