#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "kwass/io.hpp"

#include <random>

using namespace kwass;
namespace fs = std::filesystem;

namespace
{
	struct TempDir
	{
		fs::path path;
		TempDir()
		{
			static int counter = 0;
			path = fs::temp_directory_path() / ("kwass_io_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
			fs::create_directories(path);
		}
		~TempDir() { fs::remove_all(path); }
	};

	DistanceMatrix sample_matrix()
	{
		DistanceMatrix d;
		d.labels = {"a", "b", "c"};
		d.metric = Metric::kl_sym;
		d.values.resize(3, 3);
		d.values << 0, 0.1, 1.0 / 3.0, 0.1, 0, 2e-17, 1.0 / 3.0, 2e-17, 0;
		return d;
	}
} // namespace

TEST_CASE("format_real round-trips")
{
	std::mt19937_64 rng(1);
	std::normal_distribution<double> g;
	for (int i = 0; i < 1000; ++i)
	{
		const double v = g(rng) * std::pow(10.0, i % 40 - 20);
		CHECK(std::strtod(io::format_real(v).c_str(), nullptr) == v);
	}
	CHECK(io::format_real(0) == "0");
	CHECK(io::format_real(0.5) == "0.5");
}

TEST_CASE("csv parsing")
{
	const auto t = io::parse_csv("a, b ,c\r\n\n1,2,3\n 4 ,5,6\n");
	CHECK(t.header == std::vector<std::string>{"a", "b", "c"});
	REQUIRE(t.rows.size() == 2);
	CHECK(t.rows[1][0] == "4");
	const auto n = io::parse_csv("1,2\n3,4\n", false);
	CHECK(n.header.empty());
	CHECK(n.rows.size() == 2);
	CHECK(io::parse_real("1e-3", "x") == 0.001);
	CHECK_THROWS_AS(io::parse_real("abc", "x"), InputError);
	CHECK_THROWS_AS(io::parse_real("", "x"), InputError);
	CHECK_THROWS_AS(io::parse_real("1.5x", "x"), InputError);
	CHECK_THROWS_AS(io::read_text("/nonexistent/file.csv"), InputError);
}

TEST_CASE("distance matrix CSV and JSON round-trip")
{
	TempDir tmp;
	const auto d = sample_matrix();
	const std::string csv = io::distance_matrix_csv(d);
	CHECK(csv.substr(0, 6) == "a,b,c\n");
	const auto back = io::parse_distance_matrix_csv(csv);
	CHECK(back.labels == d.labels);
	CHECK(back.values == d.values);

	io::write_text_atomic(tmp.path / "d.json", io::distance_matrix_json(d).dump());
	const auto j = io::read_distance_matrix(tmp.path / "d.json");
	CHECK(j.labels == d.labels);
	CHECK(j.metric == Metric::kl_sym);
	CHECK(j.values == d.values);
	CHECK_FALSE(fs::exists(tmp.path / "d.json.tmp"));

	CHECK_THROWS_AS(io::parse_distance_matrix_csv("a,b\n0,1\n"), InputError);
	CHECK_THROWS_AS(io::parse_distance_matrix_csv("a,b\n0,1\n1\n"), InputError);
	CHECK_THROWS_AS(io::parse_distance_matrix_csv("a,b\n0,x\n1,0\n"), InputError);
	io::write_text_atomic(tmp.path / "bad.json", "{not json");
	CHECK_THROWS_AS(io::read_distance_matrix(tmp.path / "bad.json"), InputError);
}

TEST_CASE("sample sets from wide and long tables")
{
	const auto wide = io::sets_from_wide(io::parse_csv("id,s1,s2,s3\nx,1,2,3\ny,4,5,6\n"));
	REQUIRE(wide.size() == 2);
	CHECK(wide[1].id() == "y");
	CHECK(wide[1].size() == 3);
	CHECK(wide[1].dim() == 1);
	CHECK(wide[1].data()(2, 0) == 6);
	CHECK(io::sets_wide_csv(wide) == "id,s1,s2,s3\nx,1,2,3\ny,4,5,6\n");

	const auto lng = io::sets_from_long(io::parse_csv("set,x,y\nq,1,2\np,3,4\nq,5,6\n"));
	REQUIRE(lng.size() == 2);
	CHECK(lng[0].id() == "q");
	CHECK(lng[0].size() == 2);
	CHECK(lng[0].dim() == 2);
	CHECK(lng[0].data()(1, 1) == 6);
	CHECK(lng[1].id() == "p");

	CHECK_THROWS_AS(io::sets_from_wide(io::parse_csv("id,s1\nx,1\nx,2\n")), InputError);
	// rows may hold different numbers of samples
	CHECK(io::sets_from_wide(io::parse_csv("id,s1,s2\nx,1\ny,1,2\n"))[0].size() == 1);
	CHECK_THROWS_AS(io::sets_from_wide(io::parse_csv("id,s1\nx,nan\n")), InputError);
	CHECK_THROWS_AS(io::sets_from_long(io::parse_csv("set\nq\n")), InputError);
}

TEST_CASE("labels and id/value files")
{
	TempDir tmp;
	io::write_text_atomic(tmp.path / "l.csv", io::labels_csv({"a", "b"}, {1, 0}));
	const auto rows = io::read_id_value_csv(tmp.path / "l.csv");
	REQUIRE(rows.size() == 2);
	CHECK(rows[0] == std::pair<std::string, std::string>{"a", "1"});
	io::write_text_atomic(tmp.path / "short.csv", "id\nx\n");
	CHECK_THROWS_AS(io::read_id_value_csv(tmp.path / "short.csv"), InputError);
}

TEST_CASE("dendrogram and evaluation JSON")
{
	Matrix<double> d(3, 3);
	d << 0, 1, 5, 1, 0, 5, 5, 5, 0;
	const auto tree = agglomerate(d);
	const auto j = io::dendrogram_json(tree, {"A", "B", "C"});
	CHECK(j["leaves"] == 3);
	CHECK(j["linkage"] == "average");
	CHECK(j["merges"].size() == 2);
	CHECK(j["merges"][1]["height"] == 5.0);
	CHECK(j["leaf_order"] == nlohmann::json::array({2, 0, 1}));

	io::EvalReport r;
	r.table = contingency({0, 0, 1}, {"clean", "clean", "noisy"});
	r.chi_square = chi_square(r.table);
	r.noisy_row = 1;
	r.noisy_col = 1;
	r.rates = prediction_rates(r.table, 1, 1);
	const auto e = io::eval_report_json(r);
	CHECK(e["noisy_cluster"] == 1);
	CHECK(e["noisy_class"] == "noisy");
	CHECK(e["overall"] == 1.0);
	CHECK(e["contingency"]["counts"] == nlohmann::json::parse("[[2,0],[0,1]]"));

	io::EvalReport wide;
	wide.table = contingency({0, 1, 2}, {"a", "b", "a"});
	CHECK(io::eval_report_json(wide)["overall"].is_null());
}

TEST_CASE("PNG round-trip at 8 and 16 bits")
{
	TempDir tmp;
	Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic> px(3, 5);
	for (Eigen::Index i = 0; i < px.size(); ++i)
		px.data()[i] = static_cast<std::uint16_t>(i * 4099 % 65536);
	io::write_png_gray(tmp.path / "w16.png", px, 16);
	const auto img16 = io::load_image(tmp.path / "w16.png");
	CHECK(img16.id == "w16");
	CHECK(img16.pixels == px.cast<double>());

	Eigen::Matrix<std::uint16_t, Eigen::Dynamic, Eigen::Dynamic> small = px.unaryExpr([](std::uint16_t v) {
		return static_cast<std::uint16_t>(v % 256);
	});
	io::write_png_gray(tmp.path / "w8.png", small, 8);
	CHECK(io::load_png(tmp.path / "w8.png").pixels == small.cast<double>());

	io::write_text_atomic(tmp.path / "fake.png", "not a png at all");
	CHECK_THROWS_AS(io::load_image(tmp.path / "fake.png"), InputError);
	CHECK_THROWS_AS(io::load_image(tmp.path / "x.tiff"), InputError);
	CHECK_THROWS_AS(io::write_png_gray(tmp.path / "bad.png", px, 4), InputError);
}

TEST_CASE("CSV images")
{
	TempDir tmp;
	io::write_text_atomic(tmp.path / "g.csv", "1,2,3\n4,5,6\n");
	const auto img = io::load_image(tmp.path / "g.csv");
	CHECK(img.id == "g");
	CHECK(img.pixels.rows() == 2);
	CHECK(img.pixels(1, 2) == 6);
	io::write_text_atomic(tmp.path / "ragged.csv", "1,2,3\n4,5\n");
	CHECK_THROWS_AS(io::load_image(tmp.path / "ragged.csv"), InputError);
}

TEST_CASE("features CSV layout")
{
	FeatureVector f{};
	f[0] = 0.25;
	const std::string s = io::features_csv({"img"}, {f});
	CHECK(s.rfind("id,f01_autocorrelation,f02_joint_average,", 0) == 0);
	CHECK(s.find("\nimg,0.25,0,") != std::string::npos);
	CHECK(std::count(s.begin(), s.end(), '\n') == 2);
}
