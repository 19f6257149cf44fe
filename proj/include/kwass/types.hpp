#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace kwass
{
	template <typename Scalar>
	using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
	template <typename Scalar>
	using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

	/// Bad arguments or malformed data: wrong shapes, non-finite values, empty inputs.
	class InputError : public std::invalid_argument
	{
	public:
		using std::invalid_argument::invalid_argument;
	};

	/// A factorization failed or a quantity that theory says is nonnegative came out
	/// clearly negative.
	class NumericError : public std::runtime_error
	{
	public:
		using std::runtime_error::runtime_error;
	};

	/// One empirical distribution: n samples (rows) in d dimensions (columns).
	template <typename Scalar = double>
	class SampleSet
	{
	public:
		SampleSet(Matrix<Scalar> data, std::string id = {})
			: data_(std::move(data)), id_(std::move(id))
		{
			if (data_.rows() < 1 || data_.cols() < 1)
				throw InputError("sample set '" + id_ + "' must have at least one sample and one feature");
			if (!data_.allFinite())
				throw InputError("sample set '" + id_ + "' contains non-finite values");
		}

		const Matrix<Scalar> &data() const { return data_; }
		const std::string &id() const { return id_; }
		Eigen::Index size() const { return data_.rows(); }
		Eigen::Index dim() const { return data_.cols(); }

		auto sample(Eigen::Index i) const { return data_.row(i); }

	private:
		Matrix<Scalar> data_;
		std::string id_;
	};

	namespace detail
	{
		inline void require(bool ok, const std::string &what)
		{
			if (!ok)
				throw InputError(what);
		}
	} // namespace detail
} // namespace kwass
