#pragma once

#include "kwass/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <string>

namespace kwass
{
	template <typename Scalar = double>
	struct GaussianMoments
	{
		Vector<Scalar> mean;
		Matrix<Scalar> cov;

		Eigen::Index dim() const { return mean.size(); }
	};

	/// Sample mean and biased (1/n) covariance.
	template <typename Scalar>
	GaussianMoments<Scalar> moments(const SampleSet<Scalar> &x)
	{
		const Matrix<Scalar> &data = x.data();
		GaussianMoments<Scalar> g;
		g.mean = data.colwise().mean().transpose();
		const Matrix<Scalar> centred = data.rowwise() - g.mean.transpose();
		g.cov = centred.transpose() * centred / Scalar(data.rows());
		g.cov = (g.cov + g.cov.transpose()).eval() / Scalar(2);
		return g;
	}

	namespace detail
	{
		/// Eigendecomposition of a symmetric matrix that must be PSD up to roundoff.
		template <typename Scalar>
		Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> psd_eigen(const Matrix<Scalar> &c, const char *what)
		{
			const Scalar scale = std::max(Scalar(1), c.cwiseAbs().maxCoeff());
			if ((c - c.transpose()).cwiseAbs().maxCoeff() > Scalar(1e-12) * scale)
				throw NumericError(std::string(what) + ": covariance is not symmetric");
			Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(c);
			if (es.info() != Eigen::Success)
				throw NumericError(std::string(what) + ": eigendecomposition failed");
			const auto &ev = es.eigenvalues();
			const Scalar top = std::max(Scalar(0), ev.maxCoeff());
			if (ev.minCoeff() < -Scalar(1e-8) * top)
				throw NumericError(std::string(what) + ": covariance is not positive semidefinite");
			return es;
		}

		/// Sum of sqrt(eigenvalue) of a symmetric PSD matrix. Eigenvalues below 1e-12 of
		/// max(largest, scale) are roundoff and dropped; `scale` bounds the spectrum
		/// the inputs could produce, so an all-roundoff matrix sums to zero.
		template <typename Scalar>
		Scalar trace_sqrt_psd(const Matrix<Scalar> &t, Scalar scale)
		{
			const Matrix<Scalar> sym = (t + t.transpose()) / Scalar(2);
			Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(sym, Eigen::EigenvaluesOnly);
			const auto &ev = es.eigenvalues();
			const Scalar cutoff = Scalar(1e-12) * std::max({Scalar(0), ev.maxCoeff(), scale});
			Scalar total = 0;
			for (Eigen::Index i = 0; i < ev.size(); ++i)
				if (ev(i) > cutoff)
					total += std::sqrt(ev(i));
			return total;
		}
	} // namespace detail

	/// L with C = L L^T, built from the eigendecomposition so singular C is fine.
	template <typename Scalar>
	Matrix<Scalar> psd_factor(const Matrix<Scalar> &c)
	{
		const auto es = detail::psd_eigen(c, "psd_factor");
		const Vector<Scalar> root = es.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
		return es.eigenvectors() * root.asDiagonal();
	}

	/// Symmetric square root C^{1/2}.
	template <typename Scalar>
	Matrix<Scalar> psd_sqrt(const Matrix<Scalar> &c)
	{
		const auto es = detail::psd_eigen(c, "psd_sqrt");
		const Vector<Scalar> root = es.eigenvalues().cwiseMax(Scalar(0)).cwiseSqrt();
		return es.eigenvectors() * root.asDiagonal() * es.eigenvectors().transpose();
	}

	/// tr((C2 C1)^{1/2}) through the symmetric matrix L2^T C1 L2, C2 = L2 L2^T.
	/// C2 C1 is similar to L2^T C1 L2 on its range, so both share the nonzero spectrum.
	template <typename Scalar>
	Scalar trace_sqrt_product(const Matrix<Scalar> &c1, const Matrix<Scalar> &c2)
	{
		detail::require(c1.rows() == c2.rows() && c1.cols() == c2.cols() && c1.rows() == c1.cols(),
						"trace_sqrt_product: covariance shapes differ");
		const Matrix<Scalar> l2 = psd_factor(c2);
		return detail::trace_sqrt_psd<Scalar>(l2.transpose() * c1 * l2, std::abs(c1.trace() * c2.trace()));
	}

	/// tr((C1^{1/2} C2 C1^{1/2})^{1/2}), the Bures form of the same quantity.
	template <typename Scalar>
	Scalar trace_sqrt_sandwich(const Matrix<Scalar> &c1, const Matrix<Scalar> &c2)
	{
		detail::require(c1.rows() == c2.rows() && c1.cols() == c2.cols() && c1.rows() == c1.cols(),
						"trace_sqrt_sandwich: covariance shapes differ");
		const Matrix<Scalar> r1 = psd_sqrt(c1);
		return detail::trace_sqrt_psd<Scalar>(r1 * c2 * r1, std::abs(c1.trace() * c2.trace()));
	}

	/// Squared L2-Wasserstein distance between two Gaussians:
	///   |m1 - m2|^2 + tr(C1) + tr(C2) - 2 tr((C2 C1)^{1/2})
	template <typename Scalar>
	Scalar w2_gaussian_sq(const GaussianMoments<Scalar> &a, const GaussianMoments<Scalar> &b)
	{
		detail::require(a.dim() == b.dim() && a.cov.rows() == a.dim() && b.cov.rows() == b.dim(),
						"w2_gaussian_sq: dimension mismatch");
		const Scalar mean_term = (a.mean - b.mean).squaredNorm();
		const Scalar tr1 = a.cov.trace();
		const Scalar tr2 = b.cov.trace();
		const Scalar cross = trace_sqrt_product(a.cov, b.cov);
		const Scalar value = mean_term + tr1 + tr2 - 2 * cross;
		const Scalar scale = mean_term + std::abs(tr1) + std::abs(tr2);
		if (value < -Scalar(1e-8) * std::max(scale, Scalar(1e-300)))
			throw NumericError("w2_gaussian_sq: negative result beyond roundoff (" + std::to_string(double(value)) + ")");
		return std::max(value, Scalar(0));
	}

	/// KL(N_a || N_b) = 1/2 { (m_a - m_b)^T C_b^{-1} (m_a - m_b) + log(|C_b| / |C_a|) + tr(C_a C_b^{-1}) - d }.
	/// Both covariances must be strictly positive definite; nothing is regularised here.
	template <typename Scalar>
	Scalar kl_gaussian(const GaussianMoments<Scalar> &a, const GaussianMoments<Scalar> &b)
	{
		detail::require(a.dim() == b.dim() && a.cov.rows() == a.dim() && b.cov.rows() == b.dim(),
						"kl_gaussian: dimension mismatch");
		const Eigen::LLT<Matrix<Scalar>> la(a.cov);
		if (la.info() != Eigen::Success)
			throw NumericError("kl_gaussian: covariance of the first argument is singular or indefinite");
		const Eigen::LLT<Matrix<Scalar>> lb(b.cov);
		if (lb.info() != Eigen::Success)
			throw NumericError("kl_gaussian: covariance of the second argument is singular or indefinite");

		const Scalar log_det_a = 2 * la.matrixLLT().diagonal().array().log().sum();
		const Scalar log_det_b = 2 * lb.matrixLLT().diagonal().array().log().sum();

		const Vector<Scalar> diff = a.mean - b.mean;
		const Scalar quad = lb.matrixL().solve(diff).squaredNorm();
		const Matrix<Scalar> la_dense = la.matrixL();
		const Scalar trace = lb.matrixL().solve(la_dense).squaredNorm();
		return (quad + (log_det_b - log_det_a) + trace - Scalar(a.dim())) / 2;
	}
} // namespace kwass
