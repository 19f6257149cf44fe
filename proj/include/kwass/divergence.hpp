#pragma once

#include "kwass/gaussian.hpp"
#include "kwass/kernel.hpp"
#include "kwass/types.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kwass
{
	struct DivergenceOptions
	{
		KernelSpec kernel = KernelSpec::rbf(1.0);
		double rho = 0.1;
		bool report_squared = true;

		void validate() const
		{
			kernel.validate();
			detail::require(rho > 0 && std::isfinite(rho), "rho must be positive");
		}
	};

	namespace detail
	{
		/// Clamp a quantity that is nonnegative in exact arithmetic. Negatives within
		/// abs_tol * max(1, scale) are roundoff; anything below that is an error.
		template <typename Scalar>
		Scalar clamp_roundoff(Scalar value, Scalar scale, double abs_tol, const char *what)
		{
			if (!std::isfinite(double(value)))
				throw NumericError(std::string(what) + ": non-finite result");
			const Scalar tol = Scalar(abs_tol) * std::max(Scalar(1), std::abs(scale));
			if (value < -tol)
				throw NumericError(std::string(what) + ": negative result beyond roundoff (" + std::to_string(double(value)) + ")");
			return std::max(value, Scalar(0));
		}

		/// log|A| for a matrix whose determinant must be positive.
		template <typename Scalar>
		Scalar log_det_positive(const Matrix<Scalar> &a, const char *what)
		{
			const Eigen::PartialPivLU<Matrix<Scalar>> lu(a);
			const auto &packed = lu.matrixLU();
			Scalar sign = lu.permutationP().determinant();
			Scalar log_abs = 0;
			for (Eigen::Index i = 0; i < packed.rows(); ++i)
			{
				const Scalar u = packed(i, i);
				if (u == Scalar(0) || !std::isfinite(double(u)))
					throw NumericError(std::string(what) + ": determinant argument is singular");
				if (u < 0)
					sign = -sign;
				log_abs += std::log(std::abs(u));
			}
			if (sign <= 0)
				throw NumericError(std::string(what) + ": determinant argument is not positive");
			return log_abs;
		}
	} // namespace detail

	/// Everything about one sample set that kernel divergences reuse across pairs.
	template <typename Scalar = double>
	struct KernelPrepared
	{
		Matrix<Scalar> k;
		CenteringFactors<Scalar> cf;
		Scalar mean_k = 0;		   // s^T K s
		Scalar trace_cov = 0;	   // tr(J J^T K)
		Vector<Scalar> row_mean_k; // K s
		std::optional<WoodburyFactors<Scalar>> wb;
		Scalar log_det_i_minus_kb = 0; // log|I - K B|
	};

	template <typename Scalar>
	KernelPrepared<Scalar> prepare(const SampleSet<Scalar> &set, const DivergenceOptions &opts, bool with_woodbury)
	{
		opts.validate();
		KernelPrepared<Scalar> p;
		p.k = gram(opts.kernel, set);
		if (!p.k.allFinite())
			throw NumericError("Gram matrix of '" + set.id() + "' has non-finite entries");
		p.cf = centering<Scalar>(set.size());
		p.mean_k = p.k.mean();
		p.trace_cov = trace_centered(p.k, p.cf);
		p.row_mean_k = p.k.rowwise().mean();
		if (with_woodbury)
		{
			p.wb = woodbury(p.k, p.cf, Scalar(opts.rho));
			const Matrix<Scalar> i_minus_kb = Matrix<Scalar>::Identity(set.size(), set.size()) - p.k * p.wb->b_matrix;
			p.log_det_i_minus_kb = detail::log_det_positive(i_minus_kb, "kernel_kl");
		}
		return p;
	}

	/// ||mu_1 - mu_2||^2 in feature space from prepared sets and the cross Gram.
	template <typename Scalar>
	Scalar mmd_sq(const KernelPrepared<Scalar> &px, const KernelPrepared<Scalar> &py, const Matrix<Scalar> &k12)
	{
		const Scalar cross = k12.mean();
		const Scalar value = px.mean_k - 2 * cross + py.mean_k;
		return detail::clamp_roundoff(value, px.mean_k + py.mean_k + 2 * std::abs(cross), 1e-10, "mmd_sq");
	}

	/// (1/n^2) sum k(x_i, x_j) - (2/nm) sum k(x_i, y_j) + (1/m^2) sum k(y_i, y_j)
	template <typename Scalar>
	Scalar mmd_sq(const SampleSet<Scalar> &x, const SampleSet<Scalar> &y, const KernelSpec &kernel)
	{
		detail::require(x.dim() == y.dim(), "mmd_sq: sample sets differ in dimension");
		DivergenceOptions opts;
		opts.kernel = kernel;
		const auto px = prepare(x, opts, false);
		const auto py = prepare(y, opts, false);
		return mmd_sq(px, py, gram(kernel, x, y));
	}

	/// Squared kernel L2-Wasserstein distance:
	///   mmd^2 + tr(S1 K11) + tr(S2 K22) - 2 tr((K12 S2 K21 S1)^{1/2})
	template <typename Scalar>
	Scalar kernel_w2_sq(const KernelPrepared<Scalar> &px, const KernelPrepared<Scalar> &py, const Matrix<Scalar> &k12,
						const DivergenceOptions &opts)
	{
		const Scalar mmd = mmd_sq(px, py, k12);
		const Scalar cross = trace_sqrt_cross(k12, px.cf, py.cf);
		const Scalar bures = px.trace_cov + py.trace_cov - 2 * cross;
		const Scalar value = detail::clamp_roundoff(mmd + bures, px.mean_k + py.mean_k + px.trace_cov + py.trace_cov, 1e-9,
													"kernel_w2_sq");
		return opts.report_squared ? value : std::sqrt(value);
	}

	template <typename Scalar>
	Scalar kernel_w2_sq(const SampleSet<Scalar> &x, const SampleSet<Scalar> &y, const DivergenceOptions &opts = {})
	{
		detail::require(x.dim() == y.dim(), "kernel_w2_sq: sample sets differ in dimension");
		const auto px = prepare(x, opts, false);
		const auto py = prepare(y, opts, false);
		return kernel_w2_sq(px, py, gram(opts.kernel, x, y), opts);
	}

	/// KL(N_1 || N_2) between the rho-regularised feature-space Gaussians, written
	/// entirely in Gram matrices:
	///   2 KL = rho^{-1} (th121 + th222 - th122 - th221) + log|I - K11 B1| - log|I - K22 B2|
	///        + rho^{-1} tr(S1 K11) - rho^{-1} tr(S1 K12 B2 K21) - tr(B2 K22)
	/// with th_ijk = s_i^T K_ik s_k - s_i^T K_ij B_j K_jk s_k. The feature dimension cancels.
	template <typename Scalar>
	Scalar kernel_kl(const KernelPrepared<Scalar> &px, const KernelPrepared<Scalar> &py, const Matrix<Scalar> &k12,
					 const DivergenceOptions &opts)
	{
		detail::require(px.wb.has_value() && py.wb.has_value(), "kernel_kl: sets were prepared without Woodbury factors");
		detail::require(k12.rows() == px.cf.n && k12.cols() == py.cf.n, "kernel_kl: cross Gram size mismatch");
		const Scalar rho = Scalar(opts.rho);
		const Matrix<Scalar> &b2 = py.wb->b_matrix;
		const Matrix<Scalar> &k22 = py.k;

		// s1^T K12 as a column, and K22 s2
		const Vector<Scalar> p = k12.colwise().mean().transpose();
		const Vector<Scalar> &q = py.row_mean_k;
		const Vector<Scalar> b2p = b2 * p;
		const Vector<Scalar> b2q = b2 * q;
		const Scalar cross_mean = k12.mean();

		const Scalar theta121 = px.mean_k - p.dot(b2p);
		const Scalar theta222 = py.mean_k - q.dot(b2q);
		const Scalar theta122 = cross_mean - p.dot(b2q);
		const Scalar theta221 = cross_mean - q.dot(b2p);

		// J1^T K12; J is symmetric so this removes column means and scales by 1/sqrt(n)
		const Matrix<Scalar> w = (k12.rowwise() - k12.colwise().mean()) / std::sqrt(Scalar(px.cf.n));
		const Scalar tr_s1_k12_b2_k21 = (w * b2).cwiseProduct(w).sum();
		const Scalar tr_b2_k22 = b2.cwiseProduct(k22).sum();

		const Scalar twice = (theta121 + theta222 - theta122 - theta221) / rho + px.log_det_i_minus_kb -
							 py.log_det_i_minus_kb + px.trace_cov / rho - tr_s1_k12_b2_k21 / rho - tr_b2_k22;
		const Scalar scale = (std::abs(theta121) + std::abs(theta222) + px.trace_cov) / rho;
		return detail::clamp_roundoff(twice / 2, scale, 1e-8, "kernel_kl");
	}

	template <typename Scalar>
	Scalar kernel_kl(const SampleSet<Scalar> &x, const SampleSet<Scalar> &y, const DivergenceOptions &opts = {})
	{
		detail::require(x.dim() == y.dim(), "kernel_kl: sample sets differ in dimension");
		const auto px = prepare(x, opts, true);
		const auto py = prepare(y, opts, true);
		return kernel_kl(px, py, gram(opts.kernel, x, y), opts);
	}

	/// Average of the two directed kernel KL divergences.
	template <typename Scalar>
	Scalar kernel_kl_sym(const KernelPrepared<Scalar> &px, const KernelPrepared<Scalar> &py, const Matrix<Scalar> &k12,
						 const DivergenceOptions &opts)
	{
		const Matrix<Scalar> k21 = k12.transpose();
		return (kernel_kl(px, py, k12, opts) + kernel_kl(py, px, k21, opts)) / 2;
	}

	template <typename Scalar>
	Scalar kernel_kl_sym(const SampleSet<Scalar> &x, const SampleSet<Scalar> &y, const DivergenceOptions &opts = {})
	{
		detail::require(x.dim() == y.dim(), "kernel_kl_sym: sample sets differ in dimension");
		const auto px = prepare(x, opts, true);
		const auto py = prepare(y, opts, true);
		return kernel_kl_sym(px, py, gram(opts.kernel, x, y), opts);
	}

	namespace detail
	{
		template <typename Scalar>
		bool strictly_pd(const Matrix<Scalar> &c)
		{
			Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(c, Eigen::EigenvaluesOnly);
			const auto &ev = es.eigenvalues();
			return ev.maxCoeff() > 0 && ev.minCoeff() > Scalar(1e-12) * ev.maxCoeff();
		}
	} // namespace detail

	/// Symmetrised native-space KL on moment estimates. When either covariance is
	/// not strictly positive definite, rho I is added to both.
	template <typename Scalar>
	Scalar kl_sym_gaussian(GaussianMoments<Scalar> a, GaussianMoments<Scalar> b, double rho)
	{
		detail::require(a.dim() == b.dim(), "kl_sym_gaussian: dimension mismatch");
		detail::require(rho > 0, "kl_sym_gaussian: rho must be positive");
		if (!detail::strictly_pd(a.cov) || !detail::strictly_pd(b.cov))
		{
			a.cov.diagonal().array() += Scalar(rho);
			b.cov.diagonal().array() += Scalar(rho);
		}
		const Scalar value = (kl_gaussian(a, b) + kl_gaussian(b, a)) / 2;
		return detail::clamp_roundoff(value, Scalar(1), 1e-10, "kl_sym_gaussian");
	}

	template <typename Scalar>
	Scalar kl_sym_gaussian(const SampleSet<Scalar> &x, const SampleSet<Scalar> &y, const DivergenceOptions &opts = {})
	{
		return kl_sym_gaussian(moments(x), moments(y), opts.rho);
	}

	enum class Metric
	{
		w2,
		kernel_w2,
		kl_sym,
		kernel_kl_sym,
		mmd
	};

	std::string_view to_string(Metric metric);
	Metric parse_metric(std::string_view name);
	bool is_kernel_metric(Metric metric);

	/// Symmetric matrix of pairwise divergences between labelled sample sets.
	struct DistanceMatrix
	{
		std::vector<std::string> labels;
		Matrix<double> values;
		Metric metric = Metric::kernel_w2;

		Eigen::Index size() const { return values.rows(); }

		/// Throws InputError unless the matrix is square, finite, symmetric within 1e-9,
		/// has a diagonal <= 1e-9 and no entry below -1e-9.
		void validate() const;
	};

	/// Number of workers used when the caller passes 0: KWASS_WORKERS if set,
	/// otherwise the hardware concurrency.
	unsigned default_workers();

	/// All pairwise divergences. Pairs are independent jobs spread over `workers`
	/// threads (0 = default_workers()); the result does not depend on the worker count.
	DistanceMatrix distance_matrix(const std::vector<SampleSet<double>> &sets, Metric metric,
								   const DivergenceOptions &opts, unsigned workers = 0);
} // namespace kwass
