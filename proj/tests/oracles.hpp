#pragma once

// Independent reference computations used by the unit and acceptance tests.
// Nothing here calls into the library's numerical routines.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace oracle
{
	using Mat = Eigen::MatrixXd;
	using Vec = Eigen::VectorXd;

	/// Explicit feature map of (x.y + c)^2 in two dimensions.
	inline Vec poly2_features(double x1, double x2, double c)
	{
		const double r2 = std::sqrt(2.0);
		Vec f(6);
		f << x1 * x1, x2 * x2, r2 * x1 * x2, r2 * std::sqrt(c) * x1, r2 * std::sqrt(c) * x2, c;
		return f;
	}

	/// Rows of `samples` mapped through poly2_features.
	inline Mat poly2_lift(const Mat &samples, double c)
	{
		Mat out(samples.rows(), 6);
		for (Eigen::Index i = 0; i < samples.rows(); ++i)
			out.row(i) = poly2_features(samples(i, 0), samples(i, 1), c).transpose();
		return out;
	}

	struct Moments
	{
		Vec mean;
		Mat cov;
	};

	/// Plain two-pass mean and 1/n covariance.
	inline Moments moments(const Mat &rows)
	{
		const auto n = static_cast<double>(rows.rows());
		Moments m;
		m.mean = Vec::Zero(rows.cols());
		for (Eigen::Index i = 0; i < rows.rows(); ++i)
			m.mean += rows.row(i).transpose();
		m.mean /= n;
		m.cov = Mat::Zero(rows.cols(), rows.cols());
		for (Eigen::Index i = 0; i < rows.rows(); ++i)
		{
			const Vec d = rows.row(i).transpose() - m.mean;
			m.cov += d * d.transpose();
		}
		m.cov /= n;
		return m;
	}

	/// tr((A B)^{1/2}) from the spectrum of the non-symmetric product, whose
	/// eigenvalues are real and nonnegative for PSD A, B. The product is formed in
	/// long double; eigenvalues below 1e-12 of max(largest, tr A tr B) are roundoff
	/// and dropped.
	inline double trace_sqrt_of_product(const Mat &a, const Mat &b)
	{
		using Wide = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
		Eigen::EigenSolver<Wide> es(Wide(a.cast<long double>() * b.cast<long double>()), false);
		long double top = std::abs((long double)a.trace() * (long double)b.trace());
		for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
			top = std::max(top, es.eigenvalues()(i).real());
		long double t = 0;
		for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
			if (es.eigenvalues()(i).real() > 1e-12L * top)
				t += std::sqrt(es.eigenvalues()(i).real());
		return double(t);
	}

	inline double w2_sq(const Moments &a, const Moments &b)
	{
		return (a.mean - b.mean).squaredNorm() + a.cov.trace() + b.cov.trace() -
			   2 * trace_sqrt_of_product(b.cov, a.cov);
	}

	/// KL(N(m1, S1) || N(m2, S2)) by Cholesky on both covariances.
	inline double kl(const Vec &m1, const Mat &s1, const Vec &m2, const Mat &s2)
	{
		const Eigen::Index l = m1.size();
		const Eigen::LDLT<Mat> f2(s2);
		const Vec dm = m2 - m1;
		const double trace_term = f2.solve(s1).trace();
		const double maha = dm.dot(f2.solve(dm));
		const double logdet2 = f2.vectorD().array().log().sum();
		const double logdet1 = Eigen::LDLT<Mat>(s1).vectorD().array().log().sum();
		return 0.5 * (trace_term + maha - double(l) + logdet2 - logdet1);
	}

	/// KL between the feature-space Gaussians N(mu, Sigma + rho I) of two lifted sample sets.
	inline double kl_regularized(const Mat &lifted1, const Mat &lifted2, double rho)
	{
		const Moments a = moments(lifted1), b = moments(lifted2);
		const Mat eye = Mat::Identity(a.cov.rows(), a.cov.cols());
		return kl(a.mean, a.cov + rho * eye, b.mean, b.cov + rho * eye);
	}

	/// Random symmetric PSD matrix of size d with rank r.
	inline Mat random_psd(std::mt19937_64 &rng, int d, int r)
	{
		std::normal_distribution<double> g;
		Mat a(d, r);
		for (int i = 0; i < d; ++i)
			for (int j = 0; j < r; ++j)
				a(i, j) = g(rng);
		const Mat c = a * a.transpose() / double(r);
		return (c + c.transpose()) / 2;
	}

	/// Singular PSD matrix with exact zeros: a full-rank r x r block placed on a
	/// random subset of r coordinates, so the null space carries no roundoff.
	inline Mat random_psd_embedded(std::mt19937_64 &rng, int d, int r)
	{
		std::vector<int> idx(d);
		for (int i = 0; i < d; ++i)
			idx[i] = i;
		std::shuffle(idx.begin(), idx.end(), rng);
		const Mat block = random_psd(rng, r, r + 1);
		Mat c = Mat::Zero(d, d);
		for (int i = 0; i < r; ++i)
			for (int j = 0; j < r; ++j)
				c(idx[i], idx[j]) = block(i, j);
		return c;
	}

	/// Independent equal-width binning: the bin index is the number of interior
	/// bin edges strictly below v.
	inline int bin_of(double v, double lo, double hi, int levels)
	{
		if (hi == lo)
			return 0;
		int bin = 0;
		for (int k = 1; k < levels; ++k)
			if (lo + (hi - lo) * k / levels < v)
				++bin;
		return bin;
	}

	/// Co-occurrence counts by enumerating every ordered pixel pair at one of the
	/// eight unit displacements, both pixels unmasked, then normalising.
	inline Mat glcm_bruteforce(const Mat &img, const Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> &mask, int levels)
	{
		double lo = INFINITY, hi = -INFINITY;
		for (Eigen::Index r = 0; r < img.rows(); ++r)
			for (Eigen::Index c = 0; c < img.cols(); ++c)
				if (mask(r, c))
				{
					lo = std::min(lo, img(r, c));
					hi = std::max(hi, img(r, c));
				}
		Mat counts = Mat::Zero(levels, levels);
		double total = 0;
		for (Eigen::Index r1 = 0; r1 < img.rows(); ++r1)
			for (Eigen::Index c1 = 0; c1 < img.cols(); ++c1)
				for (Eigen::Index r2 = 0; r2 < img.rows(); ++r2)
					for (Eigen::Index c2 = 0; c2 < img.cols(); ++c2)
					{
						const auto dr = std::abs(r1 - r2), dc = std::abs(c1 - c2);
						if (dr > 1 || dc > 1 || (dr == 0 && dc == 0))
							continue;
						if (!mask(r1, c1) || !mask(r2, c2))
							continue;
						counts(bin_of(img(r1, c1), lo, hi, levels), bin_of(img(r2, c2), lo, hi, levels)) += 1;
						total += 1;
					}
		return total > 0 ? Mat(counts / total) : counts;
	}

	/// Pearson chi-square written out cell by cell.
	inline double chi_square(const std::vector<std::vector<double>> &t)
	{
		double total = 0;
		std::vector<double> rows(t.size(), 0.0), cols(t[0].size(), 0.0);
		for (std::size_t i = 0; i < t.size(); ++i)
			for (std::size_t j = 0; j < t[i].size(); ++j)
			{
				rows[i] += t[i][j];
				cols[j] += t[i][j];
				total += t[i][j];
			}
		double chi = 0;
		for (std::size_t i = 0; i < t.size(); ++i)
			for (std::size_t j = 0; j < t[i].size(); ++j)
			{
				const double e = rows[i] * cols[j] / total;
				chi += (t[i][j] - e) * (t[i][j] - e) / e;
			}
		return chi;
	}
} // namespace oracle
