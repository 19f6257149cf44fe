#pragma once

#include "kwass/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace kwass
{
	/// Two populations of scalar sample sets. Clean sets hold standard normal draws z;
	/// noisy sets hold c * sign(z) |z|^p + shift with p = 1 / (1 + noise) and c chosen so
	/// the transformed variable keeps unit variance. With shift = 0 both classes share
	/// mean and variance and differ only through the monotone map; noise = 0 and
	/// shift = 0 make the two generators identical.
	struct SynthConfig
	{
		int clean_sets = 60;
		int noisy_sets = 60;
		int samples = 25;
		double noise = 3.0;
		double shift = 0.0;
		std::uint64_t seed = 0;

		void validate() const;
	};

	struct SynthData
	{
		std::vector<SampleSet<double>> sets;
		std::vector<std::string> truth; // "clean" or "noisy", aligned with sets
	};

	SynthData synthesize(const SynthConfig &config);

	/// The monotone map applied to noisy samples (before the shift).
	double synth_transform(double z, double noise);
} // namespace kwass
