#include "kwass/texture.hpp"

#include <algorithm>
#include <cmath>

namespace kwass
{
	GrayImage::GrayImage(Matrix<double> px, std::string name) : pixels(std::move(px)), id(std::move(name))
	{
		detail::require(pixels.size() >= 2, "image '" + id + "' needs at least two pixels");
		detail::require(pixels.allFinite(), "image '" + id + "' has non-finite intensities");
	}

	double percentile(std::vector<double> values, double pct)
	{
		detail::require(!values.empty(), "percentile of an empty set");
		detail::require(pct >= 0 && pct <= 100, "percentile must be within [0, 100]");
		std::sort(values.begin(), values.end());
		const double pos = pct / 100.0 * double(values.size() - 1);
		const auto lo = static_cast<std::size_t>(std::floor(pos));
		const auto hi = std::min(lo + 1, values.size() - 1);
		const double frac = pos - double(lo);
		return values[lo] + frac * (values[hi] - values[lo]);
	}

	Mask threshold_mask(const GrayImage &img, double pct)
	{
		detail::require(pct >= 0 && pct <= 100, "threshold percentile must be within [0, 100]");
		if (pct == 0)
			return Mask::Constant(img.pixels.rows(), img.pixels.cols(), true);
		const std::vector<double> values(img.pixels.data(), img.pixels.data() + img.pixels.size());
		const double cutoff = percentile(values, pct);
		Mask mask = img.pixels.array() > cutoff;
		if (!mask.any())
			throw InputError("image '" + img.id + "': all pixels excluded by the intensity threshold");
		return mask;
	}

	int quantize(double v, double lo, double hi, int levels)
	{
		if (!(hi > lo))
			return 0;
		const int bin = static_cast<int>(std::ceil((v - lo) / (hi - lo) * levels)) - 1;
		return std::clamp(bin, 0, levels - 1);
	}

	Glcm glcm(const GrayImage &img, const Mask &mask, int levels)
	{
		const Eigen::Index h = img.pixels.rows(), w = img.pixels.cols();
		detail::require(mask.rows() == h && mask.cols() == w, "glcm: mask shape does not match image '" + img.id + "'");
		detail::require(levels >= 2, "glcm: need at least two gray levels");
		detail::require(mask.any(), "glcm: mask of image '" + img.id + "' is empty");

		double lo = 0, hi = 0;
		bool first = true;
		for (Eigen::Index c = 0; c < w; ++c)
			for (Eigen::Index r = 0; r < h; ++r)
				if (mask(r, c))
				{
					const double v = img.pixels(r, c);
					lo = first ? v : std::min(lo, v);
					hi = first ? v : std::max(hi, v);
					first = false;
				}

		Eigen::ArrayXXi q(h, w);
		for (Eigen::Index c = 0; c < w; ++c)
			for (Eigen::Index r = 0; r < h; ++r)
				q(r, c) = quantize(img.pixels(r, c), lo, hi, levels);

		// 0, 45, 90, 135 degrees as (row, col) steps; each pair is counted both ways
		constexpr int offsets[4][2] = {{0, 1}, {-1, 1}, {-1, 0}, {-1, -1}};
		Matrix<double> counts = Matrix<double>::Zero(levels, levels);
		double pairs = 0;
		for (Eigen::Index r = 0; r < h; ++r)
			for (Eigen::Index c = 0; c < w; ++c)
			{
				if (!mask(r, c))
					continue;
				for (const auto &o : offsets)
				{
					const Eigen::Index r2 = r + o[0], c2 = c + o[1];
					if (r2 < 0 || r2 >= h || c2 < 0 || c2 >= w || !mask(r2, c2))
						continue;
					counts(q(r, c), q(r2, c2)) += 1;
					counts(q(r2, c2), q(r, c)) += 1;
					pairs += 2;
				}
			}
		if (pairs == 0)
			throw InputError("glcm: image '" + img.id + "' has no pair of neighbouring unmasked pixels");

		Glcm g;
		g.levels = levels;
		g.p = counts / pairs;
		return g;
	}

	const std::array<std::string_view, feature_count> &feature_names()
	{
		static const std::array<std::string_view, feature_count> names = {
			"f01_autocorrelation",
			"f02_joint_average",
			"f03_cluster_prominence",
			"f04_cluster_shade",
			"f05_cluster_tendency",
			"f06_contrast",
			"f07_correlation",
			"f08_difference_entropy",
			"f09_dissimilarity",
			"f10_difference_variance",
			"f11_joint_energy",
			"f12_joint_entropy",
			"f13_inverse_difference",
			"f14_inverse_difference_moment",
			"f15_first_informational_correlation",
			"f16_second_informational_correlation",
			"f17_inverse_difference_moment_normalized",
			"f18_inverse_difference_normalized",
			"f19_inverse_variance",
			"f20_sum_average",
			"f21_sum_entropy",
			"f22_sum_variance",
			"f23_haralick_correlation",
			"f24_joint_maximum",
			"f25_joint_variance",
		};
		return names;
	}

	namespace
	{
		double entropy_term(double p) { return p > 0 ? -p * std::log2(p) : 0.0; }
	} // namespace

	FeatureVector haralick25(const Glcm &g)
	{
		const int ng = g.levels;
		const Matrix<double> &p = g.p;
		detail::require(p.rows() == ng && p.cols() == ng, "haralick25: GLCM shape does not match its level count");

		// gray levels are 1-based in every formula below
		const Eigen::VectorXd px = p.rowwise().sum();
		const Eigen::VectorXd py = p.colwise().sum().transpose();
		Eigen::VectorXd p_sum = Eigen::VectorXd::Zero(2 * ng + 1); // index i + j
		Eigen::VectorXd p_diff = Eigen::VectorXd::Zero(ng);			// index |i - j|

		double mu_x = 0, mu_y = 0;
		for (int i = 1; i <= ng; ++i)
		{
			mu_x += i * px(i - 1);
			mu_y += i * py(i - 1);
		}
		double var_x = 0, var_y = 0;
		for (int i = 1; i <= ng; ++i)
		{
			var_x += (i - mu_x) * (i - mu_x) * px(i - 1);
			var_y += (i - mu_y) * (i - mu_y) * py(i - 1);
		}

		double autocorr = 0, prominence = 0, shade = 0, tendency = 0, contrast = 0, dissimilarity = 0;
		double energy = 0, joint_entropy = 0, inv_diff = 0, inv_diff_moment = 0, idmn = 0, idn = 0;
		double inv_variance = 0, joint_max = 0, joint_variance = 0, hxy1 = 0, hxy2 = 0;
		for (int j = 1; j <= ng; ++j)
			for (int i = 1; i <= ng; ++i)
			{
				const double v = p(i - 1, j - 1);
				const double pxy = px(i - 1) * py(j - 1);
				if (pxy > 0)
					hxy2 -= pxy * std::log2(pxy);
				if (v == 0)
					continue;
				const double d = i - j;
				const double ad = std::abs(d);
				const double s = i + j - mu_x - mu_y;
				autocorr += i * j * v;
				prominence += s * s * s * s * v;
				shade += s * s * s * v;
				tendency += s * s * v;
				contrast += d * d * v;
				dissimilarity += ad * v;
				energy += v * v;
				joint_entropy += entropy_term(v);
				inv_diff += v / (1 + ad);
				inv_diff_moment += v / (1 + d * d);
				idmn += v / (1 + d * d / (double(ng) * ng));
				idn += v / (1 + ad / ng);
				if (i != j)
					inv_variance += v / (d * d);
				joint_max = std::max(joint_max, v);
				joint_variance += (i - mu_x) * (i - mu_x) * v;
				hxy1 -= v * std::log2(pxy);
				p_sum(i + j) += v;
				p_diff(static_cast<int>(ad)) += v;
			}

		double sum_average = 0, sum_entropy = 0;
		for (int k = 2; k <= 2 * ng; ++k)
		{
			sum_average += k * p_sum(k);
			sum_entropy += entropy_term(p_sum(k));
		}
		double sum_variance = 0;
		for (int k = 2; k <= 2 * ng; ++k)
			sum_variance += (k - sum_average) * (k - sum_average) * p_sum(k);

		double diff_average = 0, diff_entropy = 0;
		for (int k = 0; k < ng; ++k)
		{
			diff_average += k * p_diff(k);
			diff_entropy += entropy_term(p_diff(k));
		}
		double diff_variance = 0;
		for (int k = 0; k < ng; ++k)
			diff_variance += (k - diff_average) * (k - diff_average) * p_diff(k);

		const double sd_x = std::sqrt(var_x), sd_y = std::sqrt(var_y);
		const double correlation = (sd_x > 0 && sd_y > 0) ? (autocorr - mu_x * mu_y) / (sd_x * sd_y) : 0.0;

		double hx = 0, hy = 0;
		for (int i = 0; i < ng; ++i)
		{
			hx += entropy_term(px(i));
			hy += entropy_term(py(i));
		}
		const double h_max = std::max(hx, hy);
		const double imc1 = h_max > 0 ? (joint_entropy - hxy1) / h_max : 0.0;
		const double imc2 = std::sqrt(std::max(0.0, 1.0 - std::exp(-2.0 * (hxy2 - joint_entropy))));

		// marginal-vector statistics: mean and population deviation of the entries of px, py
		const double m_px = px.mean(), m_py = py.mean();
		const double s_px = std::sqrt((px.array() - m_px).square().mean());
		const double s_py = std::sqrt((py.array() - m_py).square().mean());
		const double haralick_corr = (s_px > 0 && s_py > 0) ? (autocorr - m_px * m_py) / (s_px * s_py) : 0.0;

		return {autocorr,	   mu_x,		  prominence, shade,		tendency,	 contrast,		 correlation,
				diff_entropy,  dissimilarity, diff_variance, energy,	joint_entropy, inv_diff,	 inv_diff_moment,
				imc1,		   imc2,		  idmn,		  idn,			inv_variance,  sum_average,	 sum_entropy,
				sum_variance,  haralick_corr, joint_max,	 joint_variance};
	}

	std::vector<FeatureVector> normalize_corpus(const std::vector<FeatureVector> &rows)
	{
		std::vector<FeatureVector> out(rows.size());
		if (rows.empty())
			return out;
		for (std::size_t f = 0; f < feature_count; ++f)
		{
			double lo = rows[0][f], hi = rows[0][f];
			for (const auto &r : rows)
			{
				lo = std::min(lo, r[f]);
				hi = std::max(hi, r[f]);
			}
			const double span = hi - lo;
			for (std::size_t i = 0; i < rows.size(); ++i)
				out[i][f] = span > 0 ? (rows[i][f] - lo) / span : 0.0;
		}
		return out;
	}

	FeatureVector extract_features(const GrayImage &img, double pct, int levels)
	{
		return haralick25(glcm(img, threshold_mask(img, pct), levels));
	}
} // namespace kwass
