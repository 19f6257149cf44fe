#include "kwass/io.hpp"

#include <png.h>

#include <cerrno>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>

namespace kwass::io
{
	namespace fs = std::filesystem;

	std::string format_real(double v)
	{
		char buf[40];
		std::snprintf(buf, sizeof buf, "%.17g", v);
		return buf;
	}

	namespace
	{
		std::string trim(std::string_view s)
		{
			const auto first = s.find_first_not_of(" \t\r\n");
			if (first == std::string_view::npos)
				return {};
			const auto last = s.find_last_not_of(" \t\r\n");
			return std::string(s.substr(first, last - first + 1));
		}

		std::vector<std::string> split_line(const std::string &line)
		{
			std::vector<std::string> out;
			std::size_t start = 0;
			for (;;)
			{
				const auto comma = line.find(',', start);
				out.push_back(trim(std::string_view(line).substr(start, comma - start)));
				if (comma == std::string::npos)
					break;
				start = comma + 1;
			}
			return out;
		}
	} // namespace

	CsvTable parse_csv(const std::string &text, bool has_header)
	{
		CsvTable t;
		std::istringstream in(text);
		std::string line;
		bool header_done = !has_header;
		while (std::getline(in, line))
		{
			if (trim(line).empty())
				continue;
			auto fields = split_line(line);
			if (!header_done)
			{
				t.header = std::move(fields);
				header_done = true;
			}
			else
				t.rows.push_back(std::move(fields));
		}
		return t;
	}

	std::string read_text(const fs::path &path)
	{
		std::ifstream in(path, std::ios::binary);
		if (!in)
			throw InputError("cannot open '" + path.string() + "'");
		std::ostringstream ss;
		ss << in.rdbuf();
		return ss.str();
	}

	CsvTable read_csv(const fs::path &path, bool has_header) { return parse_csv(read_text(path), has_header); }

	double parse_real(const std::string &field, const std::string &context)
	{
		// strtod accepts the inf/nan spellings that from_chars in older libstdc++ may not
		errno = 0;
		char *end = nullptr;
		const double v = std::strtod(field.c_str(), &end);
		if (field.empty() || end != field.c_str() + field.size() || errno == ERANGE)
			throw InputError(context + ": '" + field + "' is not a number");
		return v;
	}

	void write_text_atomic(const fs::path &path, const std::string &content)
	{
		if (path.has_parent_path())
			fs::create_directories(path.parent_path());
		fs::path tmp = path;
		tmp += ".tmp";
		{
			std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
			if (!out)
				throw InputError("cannot write '" + tmp.string() + "'");
			out << content;
			out.flush();
			if (!out)
				throw InputError("failed writing '" + tmp.string() + "'");
		}
		fs::rename(tmp, path);
	}

	std::string distance_matrix_csv(const DistanceMatrix &d)
	{
		std::string s;
		for (std::size_t i = 0; i < d.labels.size(); ++i)
		{
			if (i)
				s += ',';
			s += d.labels[i];
		}
		s += '\n';
		for (Eigen::Index i = 0; i < d.values.rows(); ++i)
		{
			for (Eigen::Index j = 0; j < d.values.cols(); ++j)
			{
				if (j)
					s += ',';
				s += format_real(d.values(i, j));
			}
			s += '\n';
		}
		return s;
	}

	nlohmann::json distance_matrix_json(const DistanceMatrix &d)
	{
		nlohmann::json values = nlohmann::json::array();
		for (Eigen::Index i = 0; i < d.values.rows(); ++i)
		{
			nlohmann::json row = nlohmann::json::array();
			for (Eigen::Index j = 0; j < d.values.cols(); ++j)
				row.push_back(d.values(i, j));
			values.push_back(std::move(row));
		}
		return {{"labels", d.labels}, {"metric", std::string(to_string(d.metric))}, {"values", std::move(values)}};
	}

	DistanceMatrix parse_distance_matrix_csv(const std::string &text)
	{
		const CsvTable t = parse_csv(text, true);
		const std::size_t n = t.header.size();
		detail::require(n >= 1, "distance matrix CSV has no header");
		detail::require(t.rows.size() == n, "distance matrix CSV has " + std::to_string(t.rows.size()) + " rows for " +
												std::to_string(n) + " labels");
		DistanceMatrix d;
		d.labels = t.header;
		d.values.resize(n, n);
		for (std::size_t i = 0; i < n; ++i)
		{
			detail::require(t.rows[i].size() == n, "distance matrix CSV row " + std::to_string(i + 1) + " has " +
													   std::to_string(t.rows[i].size()) + " fields");
			for (std::size_t j = 0; j < n; ++j)
				d.values(i, j) = parse_real(t.rows[i][j], "distance matrix CSV");
		}
		return d;
	}

	DistanceMatrix read_distance_matrix(const fs::path &path)
	{
		if (path.extension() == ".json")
		{
			nlohmann::json j;
			try
			{
				j = nlohmann::json::parse(read_text(path));
			}
			catch (const nlohmann::json::exception &e)
			{
				throw InputError("'" + path.string() + "': " + e.what());
			}
			DistanceMatrix d;
			d.labels = j.at("labels").get<std::vector<std::string>>();
			d.metric = parse_metric(j.at("metric").get<std::string>());
			const auto &rows = j.at("values");
			const std::size_t n = rows.size();
			d.values.resize(n, n);
			for (std::size_t i = 0; i < n; ++i)
			{
				detail::require(rows[i].size() == n, "distance matrix JSON is not square");
				for (std::size_t k = 0; k < n; ++k)
					d.values(i, k) = rows[i][k].is_number() ? rows[i][k].get<double>() : std::nan("");
			}
			return d;
		}
		return parse_distance_matrix_csv(read_text(path));
	}

	std::string labels_csv(const std::vector<std::string> &ids, const std::vector<int> &labels)
	{
		detail::require(ids.size() == labels.size(), "labels_csv: size mismatch");
		std::string s = "id,label\n";
		for (std::size_t i = 0; i < ids.size(); ++i)
			s += ids[i] + ',' + std::to_string(labels[i]) + '\n';
		return s;
	}

	std::vector<std::pair<std::string, std::string>> read_id_value_csv(const fs::path &path)
	{
		const CsvTable t = read_csv(path, true);
		detail::require(t.header.size() >= 2, "'" + path.string() + "' needs at least two columns");
		std::vector<std::pair<std::string, std::string>> out;
		out.reserve(t.rows.size());
		for (std::size_t i = 0; i < t.rows.size(); ++i)
		{
			detail::require(t.rows[i].size() >= 2, "'" + path.string() + "' row " + std::to_string(i + 2) + " is short");
			out.emplace_back(t.rows[i][0], t.rows[i][1]);
		}
		return out;
	}

	nlohmann::json dendrogram_json(const Dendrogram &tree, const std::vector<std::string> &labels)
	{
		nlohmann::json merges = nlohmann::json::array();
		for (const auto &m : tree.merges)
			merges.push_back({{"left", m.left}, {"right", m.right}, {"height", m.height}, {"size", m.size}});
		return {{"leaves", tree.leaves},
				{"linkage", std::string(to_string(tree.linkage))},
				{"labels", labels},
				{"merges", std::move(merges)},
				{"leaf_order", tree.leaf_order()}};
	}

	nlohmann::json eval_report_json(const EvalReport &r)
	{
		nlohmann::json counts = nlohmann::json::array();
		for (Eigen::Index i = 0; i < r.table.counts.rows(); ++i)
		{
			nlohmann::json row = nlohmann::json::array();
			for (Eigen::Index j = 0; j < r.table.counts.cols(); ++j)
				row.push_back(r.table.counts(i, j));
			counts.push_back(std::move(row));
		}
		nlohmann::json out = {
			{"contingency", {{"clusters", r.table.row_labels}, {"classes", r.table.col_labels}, {"counts", std::move(counts)}}},
			{"chi_square", r.chi_square},
		};
		if (r.table.counts.rows() == 2 && r.table.counts.cols() == 2)
		{
			out["noisy_cluster"] = r.table.row_labels[r.noisy_row];
			out["noisy_class"] = r.table.col_labels[r.noisy_col];
			out["noisy_rate"] = r.rates.noisy_rate;
			out["clean_rate"] = r.rates.clean_rate;
			out["overall"] = r.rates.overall;
		}
		else
		{
			out["noisy_rate"] = nullptr;
			out["clean_rate"] = nullptr;
			out["overall"] = nullptr;
		}
		return out;
	}

	std::string features_csv(const std::vector<std::string> &ids, const std::vector<FeatureVector> &rows)
	{
		detail::require(ids.size() == rows.size(), "features_csv: size mismatch");
		std::string s = "id";
		for (auto name : feature_names())
		{
			s += ',';
			s += name;
		}
		s += '\n';
		for (std::size_t i = 0; i < rows.size(); ++i)
		{
			s += ids[i];
			for (double v : rows[i])
			{
				s += ',';
				s += format_real(v);
			}
			s += '\n';
		}
		return s;
	}

	std::vector<SampleSet<double>> sets_from_wide(const CsvTable &table)
	{
		std::vector<SampleSet<double>> sets;
		sets.reserve(table.rows.size());
		std::map<std::string, std::size_t> seen;
		for (std::size_t r = 0; r < table.rows.size(); ++r)
		{
			const auto &row = table.rows[r];
			detail::require(row.size() >= 2, "row " + std::to_string(r + 2) + " has no samples");
			detail::require(seen.emplace(row[0], r).second, "duplicate set id '" + row[0] + "'");
			Matrix<double> data(row.size() - 1, 1);
			for (std::size_t c = 1; c < row.size(); ++c)
				data(c - 1, 0) = parse_real(row[c], "row '" + row[0] + "'");
			sets.emplace_back(std::move(data), row[0]);
		}
		return sets;
	}

	std::vector<SampleSet<double>> sets_from_long(const CsvTable &table)
	{
		std::vector<std::string> order;
		std::map<std::string, std::vector<std::size_t>> members;
		std::size_t width = 0;
		for (std::size_t r = 0; r < table.rows.size(); ++r)
		{
			const auto &row = table.rows[r];
			detail::require(row.size() >= 2, "row " + std::to_string(r + 2) + " has no coordinates");
			if (width == 0)
				width = row.size();
			detail::require(row.size() == width, "row " + std::to_string(r + 2) + " has " + std::to_string(row.size()) +
													 " fields, expected " + std::to_string(width));
			auto [it, fresh] = members.try_emplace(row[0]);
			if (fresh)
				order.push_back(row[0]);
			it->second.push_back(r);
		}
		std::vector<SampleSet<double>> sets;
		sets.reserve(order.size());
		for (const auto &id : order)
		{
			const auto &rows = members[id];
			Matrix<double> data(rows.size(), width - 1);
			for (std::size_t i = 0; i < rows.size(); ++i)
				for (std::size_t c = 1; c < width; ++c)
					data(i, c - 1) = parse_real(table.rows[rows[i]][c], "set '" + id + "'");
			sets.emplace_back(std::move(data), id);
		}
		return sets;
	}

	std::string sets_wide_csv(const std::vector<SampleSet<double>> &sets)
	{
		detail::require(!sets.empty(), "sets_wide_csv: no sets");
		const Eigen::Index n = sets.front().size();
		std::string s = "id";
		for (Eigen::Index i = 0; i < n; ++i)
			s += ",s" + std::to_string(i + 1);
		s += '\n';
		for (const auto &set : sets)
		{
			detail::require(set.size() == n && set.dim() == 1, "sets_wide_csv: sets must be scalar with equal sizes");
			s += set.id();
			for (Eigen::Index i = 0; i < n; ++i)
				s += ',' + format_real(set.data()(i, 0));
			s += '\n';
		}
		return s;
	}

	GrayImage load_csv_image(const fs::path &path)
	{
		const CsvTable t = read_csv(path, false);
		detail::require(!t.rows.empty(), "'" + path.string() + "' is empty");
		const std::size_t w = t.rows.front().size();
		Matrix<double> px(t.rows.size(), w);
		for (std::size_t r = 0; r < t.rows.size(); ++r)
		{
			detail::require(t.rows[r].size() == w, "'" + path.string() + "' is not rectangular");
			for (std::size_t c = 0; c < w; ++c)
				px(r, c) = parse_real(t.rows[r][c], path.string());
		}
		return GrayImage(std::move(px), path.stem().string());
	}

	namespace
	{
		struct FileCloser
		{
			void operator()(std::FILE *f) const { std::fclose(f); }
		};
		using File = std::unique_ptr<std::FILE, FileCloser>;

		// libpng reports errors with longjmp; the functions between setjmp and the
		// libpng calls below hold no objects with destructors.
		struct PngError
		{
			char message[256] = {};
		};

		void png_error_handler(png_structp png, png_const_charp msg)
		{
			auto *err = static_cast<PngError *>(png_get_error_ptr(png));
			std::snprintf(err->message, sizeof err->message, "%s", msg);
			png_longjmp(png, 1);
		}
		void png_warning_handler(png_structp, png_const_charp) {}

		struct PngRead
		{
			png_structp png = nullptr;
			png_infop info = nullptr;
			PngError err;
			~PngRead() { png_destroy_read_struct(&png, &info, nullptr); }
		};

		struct PngWrite
		{
			png_structp png = nullptr;
			png_infop info = nullptr;
			PngError err;
			~PngWrite() { png_destroy_write_struct(&png, &info); }
		};

		// 0 ok, 1 libpng error, 2 not grayscale
		int read_png_header(PngRead &r, std::FILE *f, png_uint_32 &w, png_uint_32 &h, int &depth, std::size_t &rowbytes)
		{
			if (setjmp(png_jmpbuf(r.png)))
				return 1;
			png_init_io(r.png, f);
			png_set_sig_bytes(r.png, 8);
			png_read_info(r.png, r.info);
			const int color = png_get_color_type(r.png, r.info);
			if (color != PNG_COLOR_TYPE_GRAY && color != PNG_COLOR_TYPE_GRAY_ALPHA)
				return 2;
			if (png_get_bit_depth(r.png, r.info) < 8)
				png_set_expand_gray_1_2_4_to_8(r.png);
			if (color & PNG_COLOR_MASK_ALPHA)
				png_set_strip_alpha(r.png);
			png_read_update_info(r.png, r.info);
			w = png_get_image_width(r.png, r.info);
			h = png_get_image_height(r.png, r.info);
			depth = png_get_bit_depth(r.png, r.info);
			rowbytes = png_get_rowbytes(r.png, r.info);
			return 0;
		}

		bool read_png_rows(PngRead &r, png_bytepp rows)
		{
			if (setjmp(png_jmpbuf(r.png)))
				return false;
			png_read_image(r.png, rows);
			png_read_end(r.png, nullptr);
			return true;
		}

		bool write_png_rows(PngWrite &wr, std::FILE *f, png_uint_32 w, png_uint_32 h, int depth, png_bytepp rows)
		{
			if (setjmp(png_jmpbuf(wr.png)))
				return false;
			png_init_io(wr.png, f);
			png_set_IHDR(wr.png, wr.info, w, h, depth, PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
						 PNG_FILTER_TYPE_DEFAULT);
			png_write_info(wr.png, wr.info);
			png_write_image(wr.png, rows);
			png_write_end(wr.png, nullptr);
			return true;
		}
	} // namespace

	GrayImage load_png(const fs::path &path)
	{
		File file(std::fopen(path.c_str(), "rb"));
		if (!file)
			throw InputError("cannot open '" + path.string() + "'");
		png_byte sig[8];
		if (std::fread(sig, 1, 8, file.get()) != 8 || png_sig_cmp(sig, 0, 8) != 0)
			throw InputError("'" + path.string() + "' is not a PNG file");

		PngRead r;
		r.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &r.err, png_error_handler, png_warning_handler);
		if (r.png)
			r.info = png_create_info_struct(r.png);
		if (!r.png || !r.info)
			throw InputError("libpng initialisation failed");

		png_uint_32 w = 0, h = 0;
		int depth = 0;
		std::size_t rowbytes = 0;
		const int status = read_png_header(r, file.get(), w, h, depth, rowbytes);
		if (status == 1)
			throw InputError("'" + path.string() + "': " + r.err.message);
		if (status == 2)
			throw InputError("'" + path.string() + "' is not a grayscale PNG");

		std::vector<png_byte> buffer(rowbytes * h);
		std::vector<png_bytep> rows(h);
		for (png_uint_32 i = 0; i < h; ++i)
			rows[i] = buffer.data() + i * rowbytes;
		if (!read_png_rows(r, rows.data()))
			throw InputError("'" + path.string() + "': " + r.err.message);

		Matrix<double> px(h, w);
		for (png_uint_32 i = 0; i < h; ++i)
			for (png_uint_32 c = 0; c < w; ++c)
				px(i, c) = depth == 16 ? double((rows[i][2 * c] << 8) | rows[i][2 * c + 1]) : double(rows[i][c]);
		return GrayImage(std::move(px), path.stem().string());
	}

	void write_png_gray(const fs::path &path, const Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic> &px,
						int bit_depth)
	{
		detail::require(bit_depth == 8 || bit_depth == 16, "write_png_gray: bit depth must be 8 or 16");
		detail::require(px.size() > 0, "write_png_gray: empty image");
		const auto h = static_cast<png_uint_32>(px.rows()), w = static_cast<png_uint_32>(px.cols());
		const std::size_t bytes = bit_depth == 16 ? 2 : 1;
		std::vector<png_byte> buffer(std::size_t(w) * h * bytes);
		std::vector<png_bytep> rows(h);
		for (png_uint_32 r = 0; r < h; ++r)
		{
			rows[r] = buffer.data() + std::size_t(r) * w * bytes;
			for (png_uint_32 c = 0; c < w; ++c)
			{
				const std::uint16_t v = px(r, c);
				if (bytes == 2)
				{
					rows[r][2 * c] = static_cast<png_byte>(v >> 8);
					rows[r][2 * c + 1] = static_cast<png_byte>(v & 0xff);
				}
				else
					rows[r][c] = static_cast<png_byte>(std::min<std::uint16_t>(v, 255));
			}
		}

		File file(std::fopen(path.c_str(), "wb"));
		if (!file)
			throw InputError("cannot write '" + path.string() + "'");
		PngWrite wr;
		wr.png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &wr.err, png_error_handler, png_warning_handler);
		if (wr.png)
			wr.info = png_create_info_struct(wr.png);
		if (!wr.png || !wr.info)
			throw InputError("libpng initialisation failed");
		if (!write_png_rows(wr, file.get(), w, h, bit_depth, rows.data()))
			throw InputError("'" + path.string() + "': " + wr.err.message);
	}

	GrayImage load_image(const fs::path &path)
	{
		const auto ext = path.extension().string();
		if (ext == ".png" || ext == ".PNG")
			return load_png(path);
		if (ext == ".csv" || ext == ".CSV")
			return load_csv_image(path);
		throw InputError("unsupported image format '" + path.string() + "' (expected .png or .csv)");
	}
} // namespace kwass::io
