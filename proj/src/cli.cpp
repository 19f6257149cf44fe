#include "kwass/cli.hpp"

#include "kwass/clustering.hpp"
#include "kwass/divergence.hpp"
#include "kwass/io.hpp"
#include "kwass/synth.hpp"
#include "kwass/texture.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

namespace kwass::cli
{
	namespace fs = std::filesystem;

	namespace
	{
		class UsageError : public std::runtime_error
		{
		public:
			using std::runtime_error::runtime_error;
		};

		struct FeaturesArgs
		{
			std::vector<std::string> inputs;
			std::string output;
			int levels = 64;
			double percentile = 5.0;
		};

		struct DistmatArgs
		{
			std::string input;
			std::string output;
			std::string json;
			std::string metric = "kernel_w2";
			std::string kernel;
			double gamma = 1.0;
			int degree = 2;
			double offset = 1.0;
			double rho = 0.1;
			bool squared = true;
			bool columns_as_samples = true;
			unsigned workers = 0;
		};

		struct ClusterArgs
		{
			std::string input;
			int k = 2;
			std::string linkage = "average";
			std::string output;
			std::string dendrogram;
			std::string heatmap;
			std::string scatter;
			std::string scatter_against;
		};

		struct EvalArgs
		{
			std::string labels;
			std::string truth;
			std::string output;
			std::string positive_class;
		};

		struct SynthArgs
		{
			std::string per_class = "60";
			int sets = 0;
			int samples = 25;
			double noise = 3.0;
			double shift = 0.0;
			std::uint64_t seed = 0;
			std::string output;
		};

		void write_output(const std::string &path, const std::string &content, std::ostream &out)
		{
			if (path.empty() || path == "-")
				out << content;
			else
				io::write_text_atomic(path, content);
		}

		bool is_image_file(const fs::path &p)
		{
			const auto ext = p.extension().string();
			return ext == ".png" || ext == ".PNG" || ext == ".csv" || ext == ".CSV";
		}

		int cmd_features(const FeaturesArgs &a, std::ostream &out, std::ostream &err)
		{
			std::vector<fs::path> files;
			for (const auto &in : a.inputs)
			{
				const fs::path p(in);
				if (fs::is_directory(p))
				{
					for (const auto &entry : fs::directory_iterator(p))
						if (entry.is_regular_file() && is_image_file(entry.path()))
							files.push_back(entry.path());
				}
				else
					files.push_back(p);
			}
			std::sort(files.begin(), files.end(), [](const fs::path &x, const fs::path &y) {
				return std::pair(x.stem().string(), x.string()) < std::pair(y.stem().string(), y.string());
			});
			detail::require(!files.empty(), "features: no input images");

			std::vector<std::string> ids;
			std::vector<FeatureVector> rows;
			std::set<std::string> seen;
			for (const auto &f : files)
			{
				try
				{
					const GrayImage img = io::load_image(f);
					if (!seen.insert(img.id).second)
						throw InputError("duplicate image id '" + img.id + "'");
					rows.push_back(extract_features(img, a.percentile, a.levels));
					ids.push_back(img.id);
				}
				catch (const std::exception &e)
				{
					err << "warning: skipping '" << f.string() << "': " << e.what() << '\n';
				}
			}
			if (rows.empty())
				throw InputError("features: every input failed");
			write_output(a.output, io::features_csv(ids, normalize_corpus(rows)), out);
			return ok;
		}

		int cmd_distmat(const DistmatArgs &a, bool kernel_given, std::ostream &out)
		{
			const Metric metric = parse_metric(a.metric);
			if (!is_kernel_metric(metric) && kernel_given)
				throw UsageError("metric '" + a.metric + "' works in native space and takes no --kernel");

			DivergenceOptions opts;
			opts.kernel.family = kernel_given ? parse_kernel_family(a.kernel) : KernelFamily::rbf;
			opts.kernel.gamma = a.gamma;
			opts.kernel.degree = a.degree;
			opts.kernel.offset = a.offset;
			opts.rho = a.rho;
			opts.report_squared = a.squared;
			opts.validate();

			const io::CsvTable table = io::read_csv(a.input, true);
			auto sets = a.columns_as_samples ? io::sets_from_wide(table) : io::sets_from_long(table);
			detail::require(sets.size() >= 2, "distmat: need at least two sample sets, got " + std::to_string(sets.size()));

			const DistanceMatrix d = distance_matrix(sets, metric, opts, a.workers);
			if (fs::path(a.output).extension() == ".json")
				write_output(a.output, io::distance_matrix_json(d).dump(2) + "\n", out);
			else
				write_output(a.output, io::distance_matrix_csv(d), out);
			if (!a.json.empty())
				io::write_text_atomic(a.json, io::distance_matrix_json(d).dump(2) + "\n");
			return ok;
		}

		std::string scatter_csv(const DistanceMatrix &d, const DistanceMatrix &other, const std::vector<int> &labels)
		{
			std::map<std::string, Eigen::Index> index;
			for (std::size_t i = 0; i < other.labels.size(); ++i)
				index[other.labels[i]] = static_cast<Eigen::Index>(i);
			std::vector<Eigen::Index> map(d.labels.size());
			for (std::size_t i = 0; i < d.labels.size(); ++i)
			{
				const auto it = index.find(d.labels[i]);
				detail::require(it != index.end(), "scatter: id '" + d.labels[i] + "' missing from the comparison matrix");
				map[i] = it->second;
			}
			std::string s = "id_a,id_b,group," + std::string(to_string(d.metric)) + "," + std::string(to_string(other.metric)) + "\n";
			for (Eigen::Index i = 0; i < d.size(); ++i)
				for (Eigen::Index j = i + 1; j < d.size(); ++j)
				{
					const std::string group =
						labels[i] == labels[j] ? "within_" + std::to_string(labels[i]) : "between";
					s += d.labels[i] + ',' + d.labels[j] + ',' + group + ',' + io::format_real(d.values(i, j)) + ',' +
						 io::format_real(other.values(map[i], map[j])) + '\n';
				}
			return s;
		}

		int cmd_cluster(const ClusterArgs &a, std::ostream &out)
		{
			const DistanceMatrix d = io::read_distance_matrix(a.input);
			d.validate();
			if (a.k < 1 || a.k > d.size())
				throw UsageError("--k must be between 1 and the number of items (" + std::to_string(d.size()) + ")");
			const Linkage linkage = parse_linkage(a.linkage);

			const Dendrogram tree = agglomerate(d, linkage);
			const std::vector<int> labels = cut(tree, a.k);
			write_output(a.output, io::labels_csv(d.labels, labels), out);
			if (!a.dendrogram.empty())
				io::write_text_atomic(a.dendrogram, io::dendrogram_json(tree, d.labels).dump(2) + "\n");

			if (!a.heatmap.empty())
			{
				const auto order = tree.leaf_order();
				DistanceMatrix ordered;
				ordered.metric = d.metric;
				ordered.values.resize(d.size(), d.size());
				for (std::size_t i = 0; i < order.size(); ++i)
				{
					ordered.labels.push_back(d.labels[order[i]]);
					for (std::size_t j = 0; j < order.size(); ++j)
						ordered.values(i, j) = d.values(order[i], order[j]);
				}
				io::write_text_atomic(a.heatmap, io::distance_matrix_csv(ordered));
			}
			if (!a.scatter.empty())
			{
				const DistanceMatrix other = io::read_distance_matrix(a.scatter_against);
				io::write_text_atomic(a.scatter, scatter_csv(d, other, labels));
			}
			return ok;
		}

		int cmd_eval(const EvalArgs &a, std::ostream &out)
		{
			const auto label_rows = io::read_id_value_csv(a.labels);
			const auto truth_rows = io::read_id_value_csv(a.truth);
			std::map<std::string, std::string> truth_by_id;
			for (const auto &[id, cls] : truth_rows)
				detail::require(truth_by_id.emplace(id, cls).second, "eval: duplicate id '" + id + "' in truth file");
			detail::require(label_rows.size() == truth_by_id.size(), "eval: " + std::to_string(label_rows.size()) +
																		 " labelled ids but " +
																		 std::to_string(truth_by_id.size()) + " truth ids");

			std::vector<int> labels;
			std::vector<std::string> truth;
			std::set<std::string> seen;
			for (const auto &[id, value] : label_rows)
			{
				const auto it = truth_by_id.find(id);
				detail::require(it != truth_by_id.end(), "eval: id '" + id + "' has no truth label");
				detail::require(seen.insert(id).second, "eval: duplicate id '" + id + "' in labels file");
				int label = 0;
				try
				{
					std::size_t used = 0;
					label = std::stoi(value, &used);
					detail::require(used == value.size(), "");
				}
				catch (const std::exception &)
				{
					throw InputError("eval: cluster label '" + value + "' of id '" + id + "' is not an integer");
				}
				labels.push_back(label);
				truth.push_back(it->second);
			}

			io::EvalReport report;
			report.table = contingency(labels, truth);
			report.chi_square = chi_square(report.table);
			const auto &t = report.table;
			if (t.counts.rows() == 2 && t.counts.cols() == 2)
			{
				std::string positive = a.positive_class;
				if (positive.empty())
				{
					const auto &cls = t.col_labels;
					positive = std::find(cls.begin(), cls.end(), "noisy") != cls.end() ? "noisy" : cls.back();
				}
				const auto col = std::find(t.col_labels.begin(), t.col_labels.end(), positive);
				detail::require(col != t.col_labels.end(), "eval: positive class '" + positive + "' not present in truth");
				report.noisy_col = static_cast<int>(col - t.col_labels.begin());
				// the cluster with the larger share of the positive class is the one predicted positive
				const auto share = [&](int r) {
					return double(t.counts(r, report.noisy_col)) / double(t.counts.row(r).sum());
				};
				report.noisy_row = share(1) > share(0) ? 1 : 0;
				report.rates = prediction_rates(t, report.noisy_row, report.noisy_col);
			}
			else if (!a.positive_class.empty())
				throw InputError("eval: prediction rates need exactly two clusters and two classes");
			write_output(a.output, io::eval_report_json(report).dump(2) + "\n", out);
			return ok;
		}

		int cmd_synth(const SynthArgs &a, bool sets_given, bool per_class_given)
		{
			SynthConfig cfg;
			if (sets_given && !per_class_given)
			{
				if (a.sets < 2)
					throw UsageError("--sets must be at least 2");
				cfg.clean_sets = a.sets - a.sets / 2;
				cfg.noisy_sets = a.sets / 2;
			}
			else
			{
				const auto comma = a.per_class.find(',');
				try
				{
					cfg.clean_sets = std::stoi(a.per_class.substr(0, comma));
					cfg.noisy_sets = comma == std::string::npos ? cfg.clean_sets : std::stoi(a.per_class.substr(comma + 1));
				}
				catch (const std::exception &)
				{
					throw UsageError("--per-class expects N or N_clean,N_noisy");
				}
				if (sets_given && cfg.clean_sets + cfg.noisy_sets != a.sets)
					throw UsageError("--sets disagrees with --per-class");
			}
			cfg.samples = a.samples;
			cfg.noise = a.noise;
			cfg.shift = a.shift;
			cfg.seed = a.seed;
			const SynthData data = synthesize(cfg);

			const fs::path dir(a.output);
			io::write_text_atomic(dir / "sets.csv", io::sets_wide_csv(data.sets));
			std::string truth = "id,class\n";
			for (std::size_t i = 0; i < data.sets.size(); ++i)
				truth += data.sets[i].id() + ',' + data.truth[i] + '\n';
			io::write_text_atomic(dir / "truth.csv", truth);
			return ok;
		}
	} // namespace

	int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
	{
		CLI::App app{"Kernel Wasserstein and KL divergences between empirical distributions", "kwass"};
		app.require_subcommand(1);

		FeaturesArgs fa;
		auto *features = app.add_subcommand("features", "GLCM texture features (25 per image), min-max normalised");
		features->add_option("inputs", fa.inputs, "Image files (.png, .csv) or directories")->required();
		features->add_option("-o,--output", fa.output, "Feature CSV (default: stdout)");
		features->add_option("--levels", fa.levels, "Gray levels")->check(CLI::Range(2, 65536));
		features->add_option("--percentile", fa.percentile, "Intensity threshold percentile")->check(CLI::Range(0.0, 100.0));

		DistmatArgs da;
		auto *distmat = app.add_subcommand("distmat", "Pairwise divergence matrix between sample sets");
		distmat->add_option("input", da.input, "Wide CSV (id + samples per row) or long CSV (set id + coordinates)")->required();
		distmat->add_option("-o,--output", da.output, "Output file; .json selects JSON, anything else CSV (default: stdout)");
		distmat->add_option("--json", da.json, "Also write the JSON form here");
		distmat->add_option("--metric", da.metric, "w2 | kernel_w2 | kl_sym | kernel_kl_sym | mmd")
			->check(CLI::IsMember({"w2", "kernel_w2", "kl_sym", "kernel_kl_sym", "mmd"}));
		auto *kernel_opt = distmat->add_option("--kernel", da.kernel, "rbf | polynomial | linear (kernel metrics only)")
							   ->check(CLI::IsMember({"rbf", "polynomial", "linear"}));
		distmat->add_option("--gamma", da.gamma, "RBF width");
		distmat->add_option("--degree", da.degree, "Polynomial degree");
		distmat->add_option("--offset", da.offset, "Polynomial offset");
		distmat->add_option("--rho", da.rho, "Covariance regulariser for KL");
		distmat->add_flag("--squared,!--no-squared", da.squared, "Report squared W2 (default true)");
		distmat->add_flag("--columns-as-samples,!--rows-as-samples", da.columns_as_samples,
						  "Each row's values are the samples of one set (default true)");
		distmat->add_option("--workers", da.workers, "Worker threads (0: KWASS_WORKERS or hardware)");

		ClusterArgs ca;
		auto *cluster = app.add_subcommand("cluster", "Hierarchical clustering of a distance matrix");
		cluster->add_option("input", ca.input, "Distance matrix (CSV or JSON)")->required();
		cluster->add_option("--k", ca.k, "Number of clusters");
		cluster->add_option("--linkage", ca.linkage, "average | complete | single")
			->check(CLI::IsMember({"average", "complete", "single"}));
		cluster->add_option("-o,--output", ca.output, "Labels CSV (default: stdout)");
		cluster->add_option("--dendrogram", ca.dendrogram, "Dendrogram JSON");
		cluster->add_option("--emit-heatmap-csv", ca.heatmap, "Distance matrix reordered by dendrogram leaf order");
		auto *scatter = cluster->add_option("--emit-scatter-csv", ca.scatter, "Pairwise values against a second matrix");
		cluster->add_option("--scatter-against", ca.scatter_against, "Second distance matrix for the scatter export")
			->needs(scatter);
		scatter->needs("--scatter-against");

		EvalArgs ea;
		auto *eval = app.add_subcommand("eval", "Contingency table, chi-square and prediction rates");
		eval->add_option("labels", ea.labels, "Cluster labels CSV (id,label)")->required();
		eval->add_option("truth", ea.truth, "Truth CSV (id,class)")->required();
		eval->add_option("-o,--output", ea.output, "Report JSON (default: stdout)");
		eval->add_option("--positive-class", ea.positive_class, "Class counted as noisy (default: 'noisy' or the last class)");

		SynthArgs sa;
		auto *synth = app.add_subcommand("synth", "Synthetic two-population sample sets");
		auto *per_class = synth->add_option("--per-class", sa.per_class, "Sets per class: N or N_clean,N_noisy");
		auto *sets = synth->add_option("--sets", sa.sets, "Total number of sets, split evenly");
		synth->add_option("--samples", sa.samples, "Samples per set");
		synth->add_option("--noise", sa.noise, "Strength of the monotone distortion of the noisy class");
		synth->add_option("--shift", sa.shift, "Location shift of the noisy class");
		synth->add_option("--seed", sa.seed, "RNG seed")->required();
		synth->add_option("-o,--output", sa.output, "Output directory")->required();

		std::vector<const char *> argv;
		argv.reserve(args.size());
		for (const auto &s : args)
			argv.push_back(s.c_str());

		try
		{
			app.parse(static_cast<int>(argv.size()), argv.data());
		}
		catch (const CLI::ParseError &e)
		{
			const int code = app.exit(e, out, err);
			return code == 0 ? ok : usage_error;
		}

		try
		{
			if (features->parsed())
				return cmd_features(fa, out, err);
			if (distmat->parsed())
				return cmd_distmat(da, kernel_opt->count() > 0, out);
			if (cluster->parsed())
				return cmd_cluster(ca, out);
			if (eval->parsed())
				return cmd_eval(ea, out);
			if (synth->parsed())
				return cmd_synth(sa, sets->count() > 0, per_class->count() > 0);
		}
		catch (const UsageError &e)
		{
			err << "usage error: " << e.what() << '\n';
			return usage_error;
		}
		catch (const NumericError &e)
		{
			err << "numeric error: " << e.what() << '\n';
			return numeric_error;
		}
		catch (const std::exception &e)
		{
			err << "error: " << e.what() << '\n';
			return input_error;
		}
		return usage_error;
	}
} // namespace kwass::cli
