#pragma once

#include "kwass/types.hpp"

#include <Eigen/Cholesky>
#include <Eigen/SVD>

#include <cmath>
#include <string>
#include <string_view>

namespace kwass
{
	enum class KernelFamily
	{
		rbf,
		polynomial,
		linear
	};

	std::string_view to_string(KernelFamily family);
	KernelFamily parse_kernel_family(std::string_view name);

	/// Positive definite kernel k(x, y).
	///   rbf:        exp(-gamma ||x - y||^2)
	///   polynomial: (x.y + offset)^degree
	///   linear:     x.y
	struct KernelSpec
	{
		KernelFamily family = KernelFamily::rbf;
		double gamma = 1.0;
		int degree = 2;
		double offset = 1.0;

		static KernelSpec rbf(double gamma = 1.0) { return {KernelFamily::rbf, gamma, 2, 1.0}; }
		static KernelSpec polynomial(int degree, double offset) { return {KernelFamily::polynomial, 1.0, degree, offset}; }
		static KernelSpec linear() { return {KernelFamily::linear, 1.0, 2, 1.0}; }

		void validate() const
		{
			detail::require(gamma > 0 && std::isfinite(gamma), "kernel gamma must be positive");
			detail::require(degree >= 1, "polynomial degree must be >= 1");
			detail::require(offset >= 0 && std::isfinite(offset), "polynomial offset must be nonnegative");
		}
	};

	template <typename DerivedX, typename DerivedY>
	typename DerivedX::Scalar kernel_eval(const KernelSpec &spec,
										  const Eigen::MatrixBase<DerivedX> &x,
										  const Eigen::MatrixBase<DerivedY> &y)
	{
		using Scalar = typename DerivedX::Scalar;
		detail::require(x.size() == y.size(), "kernel_eval: dimension mismatch");
		switch (spec.family)
		{
		case KernelFamily::rbf:
		{
			Scalar sq = 0;
			for (Eigen::Index i = 0; i < x.size(); ++i)
			{
				const Scalar diff = x(i) - y(i);
				sq += diff * diff;
			}
			return std::exp(-Scalar(spec.gamma) * sq);
		}
		case KernelFamily::polynomial:
		{
			const Scalar base = x.reshaped().dot(y.reshaped()) + Scalar(spec.offset);
			Scalar out = 1;
			for (int i = 0; i < spec.degree; ++i)
				out *= base;
			return out;
		}
		case KernelFamily::linear:
			return x.reshaped().dot(y.reshaped());
		}
		throw InputError("kernel_eval: unknown kernel family");
	}

	/// Cross Gram matrix, entry (i, j) = k(a_i, b_j).
	template <typename Scalar>
	Matrix<Scalar> gram(const KernelSpec &spec, const SampleSet<Scalar> &a, const SampleSet<Scalar> &b)
	{
		detail::require(a.dim() == b.dim(), "gram: sample sets '" + a.id() + "' and '" + b.id() + "' differ in dimension");
		spec.validate();
		Matrix<Scalar> k(a.size(), b.size());
		for (Eigen::Index j = 0; j < b.size(); ++j)
			for (Eigen::Index i = 0; i < a.size(); ++i)
				k(i, j) = kernel_eval(spec, a.sample(i), b.sample(j));
		return k;
	}

	/// Symmetric Gram matrix of a single set. Only the upper triangle is evaluated.
	template <typename Scalar>
	Matrix<Scalar> gram(const KernelSpec &spec, const SampleSet<Scalar> &a)
	{
		spec.validate();
		const Eigen::Index n = a.size();
		Matrix<Scalar> k(n, n);
		for (Eigen::Index j = 0; j < n; ++j)
			for (Eigen::Index i = 0; i <= j; ++i)
				k(i, j) = k(j, i) = kernel_eval(spec, a.sample(i), a.sample(j));
		return k;
	}

	/// s = (1/n) 1 and J = (1/sqrt(n)) (I - s 1^T), so that Phi J holds the
	/// mean-centred feature vectors scaled by 1/sqrt(n) and Sigma = Phi J J^T Phi^T.
	template <typename Scalar = double>
	struct CenteringFactors
	{
		Eigen::Index n = 0;
		Vector<Scalar> s;
		Matrix<Scalar> J;

		/// S = J J^T = (1/n)(I - (1/n) 1 1^T)
		Matrix<Scalar> S() const { return J * J.transpose(); }
	};

	template <typename Scalar = double>
	CenteringFactors<Scalar> centering(Eigen::Index n)
	{
		detail::require(n >= 1, "centering: n must be >= 1");
		CenteringFactors<Scalar> cf;
		cf.n = n;
		cf.s = Vector<Scalar>::Constant(n, Scalar(1) / Scalar(n));
		cf.J = (Matrix<Scalar>::Identity(n, n) - cf.s * Vector<Scalar>::Ones(n).transpose()) / std::sqrt(Scalar(n));
		return cf;
	}

	/// C_n K C_m with C = I - (1/n) 1 1^T: removes row means, column means, adds back the grand mean.
	template <typename Derived>
	Matrix<typename Derived::Scalar> double_center(const Eigen::MatrixBase<Derived> &k)
	{
		using Scalar = typename Derived::Scalar;
		const Vector<Scalar> row_mean = k.rowwise().mean();
		const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> col_mean = k.colwise().mean();
		const Scalar grand = k.mean();
		Matrix<Scalar> out = k;
		out.colwise() -= row_mean;
		out.rowwise() -= col_mean;
		out.array() += grand;
		return out;
	}

	/// tr(J J^T K): the trace of the feature-space covariance of the set behind K.
	template <typename Scalar>
	Scalar trace_centered(const Matrix<Scalar> &k, const CenteringFactors<Scalar> &cf)
	{
		detail::require(k.rows() == cf.n && k.cols() == cf.n, "trace_centered: Gram size does not match centering factors");
		return k.diagonal().mean() - cf.s.dot(k * cf.s);
	}

	/// Sum of singular values. Values below rel_clamp * sigma_max are treated as zero.
	template <typename Derived>
	typename Derived::Scalar nuclear_norm(const Eigen::MatrixBase<Derived> &a, double rel_clamp = 1e-12)
	{
		using Scalar = typename Derived::Scalar;
		if (a.size() == 0)
			return Scalar(0);
		if (!a.allFinite())
			throw NumericError("nuclear_norm: non-finite matrix entries");
		const Eigen::BDCSVD<Matrix<Scalar>> svd(a.derived());
		const auto &sv = svd.singularValues();
		if (sv.size() == 0)
			return Scalar(0);
		const Scalar cutoff = Scalar(rel_clamp) * sv(0);
		Scalar total = 0;
		for (Eigen::Index i = 0; i < sv.size(); ++i)
			if (sv(i) > cutoff)
				total += sv(i);
		return total;
	}

	/// The Gram matrices needed to compare two sample sets. K21 is K12^T and never stored.
	template <typename Scalar = double>
	struct GramBundle
	{
		Matrix<Scalar> k11;
		Matrix<Scalar> k22;
		Matrix<Scalar> k12;
		CenteringFactors<Scalar> cf1;
		CenteringFactors<Scalar> cf2;
	};

	template <typename Scalar>
	GramBundle<Scalar> make_bundle(const KernelSpec &spec, const SampleSet<Scalar> &x, const SampleSet<Scalar> &y)
	{
		return {gram(spec, x), gram(spec, y), gram(spec, x, y), centering<Scalar>(x.size()), centering<Scalar>(y.size())};
	}

	/// tr((K12 J2 J2^T K21 J1 J1^T)^{1/2}) = tr((Sigma_2 Sigma_1)^{1/2}).
	///
	/// With G = J1^T K12 J2, G G^T = J1^T K12 J2 J2^T K21 J1 has the same nonzero
	/// spectrum as the product above (cyclic permutation), so the trace root is the
	/// nuclear norm of G. G is an n x m matrix and is formed by double centring K12.
	template <typename Scalar>
	Scalar trace_sqrt_cross(const Matrix<Scalar> &k12, const CenteringFactors<Scalar> &cf1, const CenteringFactors<Scalar> &cf2)
	{
		detail::require(k12.rows() == cf1.n && k12.cols() == cf2.n, "trace_sqrt_cross: cross Gram size does not match centering factors");
		if (!k12.allFinite())
			throw NumericError("trace_sqrt_cross: non-finite Gram entries");
		if (cf1.n == 1 || cf2.n == 1)
			return Scalar(0);
		const Matrix<Scalar> g = double_center(k12) / std::sqrt(Scalar(cf1.n) * Scalar(cf2.n));
		return nuclear_norm(g);
	}

	template <typename Scalar>
	Scalar trace_sqrt_cross(const GramBundle<Scalar> &bundle)
	{
		return trace_sqrt_cross(bundle.k12, bundle.cf1, bundle.cf2);
	}

	/// Kernel-side factors of the regularised covariance H = Phi J J^T Phi^T + rho I:
	///   H^{-1} = rho^{-1} (I - Phi B Phi^T),  B = J M^{-1} J^T,  M = rho I + J^T K J.
	template <typename Scalar = double>
	struct WoodburyFactors
	{
		Scalar rho = 0;
		Matrix<Scalar> m_matrix;
		Matrix<Scalar> b_matrix;
		Scalar log_det_m = 0;
	};

	template <typename Scalar>
	WoodburyFactors<Scalar> woodbury(const Matrix<Scalar> &k, const CenteringFactors<Scalar> &cf, Scalar rho)
	{
		detail::require(rho > 0 && std::isfinite(double(rho)), "woodbury: rho must be positive");
		detail::require(k.rows() == cf.n && k.cols() == cf.n, "woodbury: Gram size does not match centering factors");
		const Eigen::Index n = cf.n;

		WoodburyFactors<Scalar> wf;
		wf.rho = rho;
		Matrix<Scalar> jkj = double_center(k) / Scalar(n);
		jkj = (jkj + jkj.transpose()).eval() / Scalar(2);
		wf.m_matrix = jkj;
		wf.m_matrix.diagonal().array() += rho;

		const Eigen::LLT<Matrix<Scalar>> llt(wf.m_matrix);
		if (llt.info() != Eigen::Success)
			throw NumericError("woodbury: M = rho I + J^T K J is not positive definite (corrupted Gram matrix?)");
		wf.log_det_m = 2 * llt.matrixLLT().diagonal().array().log().sum();

		Matrix<Scalar> b = cf.J * llt.solve(cf.J.transpose());
		wf.b_matrix = (b + b.transpose()) / Scalar(2);
		return wf;
	}
} // namespace kwass
