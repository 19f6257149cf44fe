#include "kwass/synth.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <random>

namespace kwass
{
	void SynthConfig::validate() const
	{
		detail::require(clean_sets >= 0 && noisy_sets >= 0 && clean_sets + noisy_sets >= 1, "synth: set counts must be positive");
		detail::require(samples >= 1, "synth: samples per set must be positive");
		detail::require(noise >= 0 && std::isfinite(noise), "synth: noise must be a nonnegative number");
		detail::require(std::isfinite(shift), "synth: shift must be finite");
	}

	double synth_transform(double z, double noise)
	{
		const double p = 1.0 / (1.0 + noise);
		// E|z|^{2p} for standard normal z
		const double moment = std::pow(2.0, p) * std::tgamma(p + 0.5) / std::sqrt(std::numbers::pi);
		const double c = 1.0 / std::sqrt(moment);
		return c * std::copysign(std::pow(std::abs(z), p), z);
	}

	SynthData synthesize(const SynthConfig &config)
	{
		config.validate();
		std::mt19937_64 rng(config.seed);
		std::normal_distribution<double> normal(0.0, 1.0);

		SynthData out;
		const int total = config.clean_sets + config.noisy_sets;
		out.sets.reserve(total);
		out.truth.reserve(total);
		for (int s = 0; s < total; ++s)
		{
			const bool noisy = s >= config.clean_sets;
			Matrix<double> data(config.samples, 1);
			for (int i = 0; i < config.samples; ++i)
			{
				const double z = normal(rng);
				data(i, 0) = noisy ? synth_transform(z, config.noise) + config.shift : z;
			}
			char id[32];
			std::snprintf(id, sizeof id, "set%04d", s + 1);
			out.sets.emplace_back(std::move(data), id);
			out.truth.emplace_back(noisy ? "noisy" : "clean");
		}
		return out;
	}
} // namespace kwass
