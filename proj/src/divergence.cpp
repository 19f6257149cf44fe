#include "kwass/divergence.hpp"

#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

namespace kwass
{
	std::string_view to_string(KernelFamily family)
	{
		switch (family)
		{
		case KernelFamily::rbf:
			return "rbf";
		case KernelFamily::polynomial:
			return "polynomial";
		case KernelFamily::linear:
			return "linear";
		}
		return "unknown";
	}

	KernelFamily parse_kernel_family(std::string_view name)
	{
		if (name == "rbf")
			return KernelFamily::rbf;
		if (name == "polynomial" || name == "poly")
			return KernelFamily::polynomial;
		if (name == "linear")
			return KernelFamily::linear;
		throw InputError("unknown kernel '" + std::string(name) + "'");
	}

	std::string_view to_string(Metric metric)
	{
		switch (metric)
		{
		case Metric::w2:
			return "w2";
		case Metric::kernel_w2:
			return "kernel_w2";
		case Metric::kl_sym:
			return "kl_sym";
		case Metric::kernel_kl_sym:
			return "kernel_kl_sym";
		case Metric::mmd:
			return "mmd";
		}
		return "unknown";
	}

	Metric parse_metric(std::string_view name)
	{
		for (Metric m : {Metric::w2, Metric::kernel_w2, Metric::kl_sym, Metric::kernel_kl_sym, Metric::mmd})
			if (to_string(m) == name)
				return m;
		throw InputError("unknown metric '" + std::string(name) + "'");
	}

	bool is_kernel_metric(Metric metric)
	{
		return metric == Metric::kernel_w2 || metric == Metric::kernel_kl_sym || metric == Metric::mmd;
	}

	void DistanceMatrix::validate() const
	{
		const Eigen::Index n = values.rows();
		detail::require(values.cols() == n, "distance matrix is not square");
		detail::require(static_cast<Eigen::Index>(labels.size()) == n, "distance matrix has " + std::to_string(labels.size()) +
																		   " labels for " + std::to_string(n) + " rows");
		detail::require(values.allFinite(), "distance matrix contains NaN or infinite entries");
		for (Eigen::Index i = 0; i < n; ++i)
		{
			detail::require(values(i, i) <= 1e-9, "distance matrix diagonal entry " + std::to_string(i) + " is not zero");
			for (Eigen::Index j = 0; j < n; ++j)
			{
				detail::require(values(i, j) >= -1e-9, "distance matrix has a negative entry at (" + std::to_string(i) + ", " +
														   std::to_string(j) + ")");
				detail::require(std::abs(values(i, j) - values(j, i)) <= 1e-9,
								"distance matrix is not symmetric at (" + std::to_string(i) + ", " + std::to_string(j) + ")");
			}
		}
	}

	unsigned default_workers()
	{
		if (const char *env = std::getenv("KWASS_WORKERS"))
		{
			char *end = nullptr;
			const long v = std::strtol(env, &end, 10);
			if (end != env && *end == '\0' && v > 0)
				return static_cast<unsigned>(v);
		}
		return std::max(1u, std::thread::hardware_concurrency());
	}

	namespace
	{
		/// Runs job(0..count-1) on `workers` threads. The first failure by index wins,
		/// so the reported error does not depend on scheduling.
		template <typename Job>
		void parallel_for(std::size_t count, unsigned workers, Job &&job)
		{
			std::atomic<std::size_t> next{0};
			std::mutex error_mutex;
			std::size_t error_index = count;
			std::exception_ptr error;

			auto worker = [&]() {
				for (;;)
				{
					const std::size_t i = next.fetch_add(1);
					if (i >= count)
						return;
					try
					{
						job(i);
					}
					catch (...)
					{
						std::lock_guard lock(error_mutex);
						if (i < error_index)
						{
							error_index = i;
							error = std::current_exception();
						}
					}
				}
			};

			workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::max<std::size_t>(count, 1))));
			if (workers == 1)
				worker();
			else
			{
				std::vector<std::jthread> pool;
				pool.reserve(workers);
				for (unsigned w = 0; w < workers; ++w)
					pool.emplace_back(worker);
			}
			if (error)
				std::rethrow_exception(error);
		}

		[[noreturn]] void rethrow_for(const std::string &context)
		{
			try
			{
				throw;
			}
			catch (const InputError &e)
			{
				throw InputError(context + ": " + e.what());
			}
			catch (const NumericError &e)
			{
				throw NumericError(context + ": " + e.what());
			}
		}
	} // namespace

	DistanceMatrix distance_matrix(const std::vector<SampleSet<double>> &sets, Metric metric, const DivergenceOptions &opts,
								   unsigned workers)
	{
		opts.validate();
		detail::require(sets.size() >= 2, "distance_matrix needs at least two sample sets");
		const Eigen::Index d = sets.front().dim();
		for (const auto &s : sets)
			detail::require(s.dim() == d, "sample set '" + s.id() + "' has dimension " + std::to_string(s.dim()) +
											  ", expected " + std::to_string(d));
		if (workers == 0)
			workers = default_workers();

		const std::size_t n = sets.size();
		DistanceMatrix out;
		out.metric = metric;
		out.values = Matrix<double>::Zero(n, n);
		for (const auto &s : sets)
			out.labels.push_back(s.id());

		std::vector<KernelPrepared<double>> kernel_sets;
		std::vector<GaussianMoments<double>> gaussian_sets;
		if (is_kernel_metric(metric))
		{
			kernel_sets.resize(n);
			const bool with_woodbury = metric == Metric::kernel_kl_sym;
			parallel_for(n, workers, [&](std::size_t i) {
				try
				{
					kernel_sets[i] = prepare(sets[i], opts, with_woodbury);
				}
				catch (...)
				{
					rethrow_for("sample set '" + sets[i].id() + "'");
				}
			});
		}
		else
		{
			gaussian_sets.resize(n);
			parallel_for(n, workers, [&](std::size_t i) { gaussian_sets[i] = moments(sets[i]); });
		}

		std::vector<std::pair<std::size_t, std::size_t>> pairs;
		pairs.reserve(n * (n - 1) / 2);
		for (std::size_t i = 0; i < n; ++i)
			for (std::size_t j = i + 1; j < n; ++j)
				pairs.emplace_back(i, j);

		parallel_for(pairs.size(), workers, [&](std::size_t p) {
			const auto [i, j] = pairs[p];
			try
			{
				double v = 0;
				switch (metric)
				{
				case Metric::w2:
					v = w2_gaussian_sq(gaussian_sets[i], gaussian_sets[j]);
					if (!opts.report_squared)
						v = std::sqrt(v);
					break;
				case Metric::kl_sym:
					v = kl_sym_gaussian(gaussian_sets[i], gaussian_sets[j], opts.rho);
					break;
				case Metric::kernel_w2:
					v = kernel_w2_sq(kernel_sets[i], kernel_sets[j], gram(opts.kernel, sets[i], sets[j]), opts);
					break;
				case Metric::kernel_kl_sym:
					v = kernel_kl_sym(kernel_sets[i], kernel_sets[j], gram(opts.kernel, sets[i], sets[j]), opts);
					break;
				case Metric::mmd:
					v = mmd_sq(kernel_sets[i], kernel_sets[j], gram(opts.kernel, sets[i], sets[j]));
					break;
				}
				out.values(i, j) = v;
				out.values(j, i) = v;
			}
			catch (...)
			{
				rethrow_for(std::string(to_string(metric)) + " failed for pair ('" + sets[i].id() + "', '" + sets[j].id() + "')");
			}
		});

		out.values = (out.values + out.values.transpose()).eval() / 2.0;
		return out;
	}
} // namespace kwass
