#pragma once

#include "kwass/types.hpp"

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace kwass
{
	struct GrayImage
	{
		Matrix<double> pixels;
		std::string id;

		GrayImage(Matrix<double> px, std::string name = {});
	};

	using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

	/// Linear-interpolated order statistic (the usual "linear" percentile definition).
	double percentile(std::vector<double> values, double pct);

	/// True where the intensity is strictly above the given percentile of the image.
	/// Percentile 0 disables thresholding. Throws InputError if nothing survives.
	Mask threshold_mask(const GrayImage &img, double pct = 5.0);

	/// Equal-width quantisation of v into `levels` bins over [lo, hi]; a value on a bin
	/// edge goes to the lower bin. Returns 0 when lo == hi.
	int quantize(double v, double lo, double hi, int levels);

	struct Glcm
	{
		Matrix<double> p; // levels x levels joint probabilities
		int levels = 0;
	};

	/// Pooled, symmetric co-occurrence matrix over the unit offsets at 0, 45, 90 and
	/// 135 degrees. Only pairs with both pixels inside the mask contribute.
	Glcm glcm(const GrayImage &img, const Mask &mask, int levels = 64);

	constexpr std::size_t feature_count = 25;
	using FeatureVector = std::array<double, feature_count>;

	/// Column names, in order: f01_autocorrelation ... f25_joint_variance.
	const std::array<std::string_view, feature_count> &feature_names();

	/// The 25 GLCM features. Degenerate denominators give 0.
	FeatureVector haralick25(const Glcm &g);

	/// Per-coordinate min-max scaling to [0, 1] across rows; constant coordinates map to 0.
	std::vector<FeatureVector> normalize_corpus(const std::vector<FeatureVector> &rows);

	/// threshold_mask -> glcm -> haralick25
	FeatureVector extract_features(const GrayImage &img, double pct = 5.0, int levels = 64);
} // namespace kwass
