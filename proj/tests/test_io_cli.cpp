#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <sstream>

#include "oracles.hpp"
#include "specdec/generators.hpp"
#include "specdec/io.hpp"

using namespace specdec;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("specdec_test_" + std::to_string(::getpid()) + "_" +
            std::to_string(counter()++));
    fs::create_directories(path);
  }
  ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
  std::string file(const std::string& name) const { return (path / name).string(); }
  static int& counter() {
    static int c = 0;
    return c;
  }
};

std::string slurp(const std::string& p) {
  std::ifstream is(p);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const char* cli = std::getenv("SPECDEC_CLI");
  REQUIRE(cli != nullptr);
  return std::system((std::string(cli) + " " + args + " > /dev/null 2>&1").c_str());
}

}  // namespace

TEST_CASE("signal CSV round-trips bit-exactly") {
  TempDir dir;
  auto gen = oracles::rng(3);
  Vector v = oracles::random_vector(gen, 13, -1e3, 1e3);
  v[0] = 1.0 / 3.0;
  v[1] = 1e-17;
  v[2] = -0.0;
  Signal s = Signal::vector(v);
  io::write_signal(dir.file("s.csv"), s);
  Signal back = io::read_signal(dir.file("s.csv"));
  REQUIRE(back.size() == s.size());
  for (int i = 0; i < s.size(); ++i) CHECK(back.values[i] == s.values[i]);

  Signal img(oracles::random_vector(gen, 12), Shape{3, 4});
  io::write_signal(dir.file("img.csv"), img);
  Signal img_back = io::read_signal(dir.file("img.csv"));
  CHECK(img_back.shape.rows == 3);
  CHECK(img_back.shape.cols == 4);
  CHECK((img_back.values - img.values).norm() == 0.0);
}

TEST_CASE("trajectory and decomposition JSON round-trip bit-exactly") {
  TempDir dir;
  auto tv = make_tv1d(7);
  auto f = gen_random(Shape{7, 1}, 19);
  auto gf = gradient_flow_exact(tv, f);
  io::write_trajectory(dir.file("traj.json"), gf);
  auto back = io::read_trajectory(dir.file("traj.json"));
  REQUIRE(back.events.size() == gf.events.size());
  CHECK(back.extinction_time == gf.extinction_time);
  CHECK(back.ddl1_path == gf.ddl1_path);
  for (size_t i = 0; i < gf.events.size(); ++i) {
    CHECK(back.events[i].t == gf.events[i].t);
    CHECK((back.events[i].u.values - gf.events[i].u.values).norm() == 0.0);
    CHECK((back.events[i].p.values - gf.events[i].p.values).norm() == 0.0);
  }

  auto dec = decompose(gf);
  io::write_decomposition(dir.file("dec.json"), dec);
  auto dec_back = io::read_decomposition(dir.file("dec.json"));
  REQUIRE(dec_back.atoms.size() == dec.atoms.size());
  for (size_t i = 0; i < dec.atoms.size(); ++i) {
    CHECK(dec_back.atoms[i].t == dec.atoms[i].t);
    CHECK((dec_back.atoms[i].phi.values - dec.atoms[i].phi.values).norm() == 0.0);
  }

  // gridded variant carries the grid plus du samples
  auto gr = gradient_flow_gridded(tv, f, gf.extinction_time / 20);
  auto dg = decompose(gr);
  io::write_decomposition(dir.file("dg.json"), dg);
  auto dg_back = io::read_decomposition(dir.file("dg.json"));
  REQUIRE(dg_back.grid_t.size() == dg.grid_t.size());
  for (size_t k = 0; k < dg.grid_t.size(); ++k) {
    CHECK((dg_back.density[k].values - dg.density[k].values).norm() == 0.0);
    CHECK((dg_back.du[k].values - dg.du[k].values).norm() == 0.0);
  }
}

TEST_CASE("operator specs load every kind") {
  TempDir dir;
  io::write_regularizer_spec(dir.file("tv.json"), "tv1d", Shape{9, 1});
  auto tv = io::read_regularizer(dir.file("tv.json"));
  CHECK(tv.kind() == "tv1d");
  CHECK(tv.signal_dim() == 9);

  io::write_regularizer_spec(dir.file("iso.json"), "tv2d_iso", Shape{4, 6});
  CHECK(io::read_regularizer(dir.file("iso.json")).dual_dim() == 4 * 5 + 3 * 6);

  Eigen::MatrixXd K(2, 3);
  K << 1, -1, 0, 0, 1, -1;
  io::write_regularizer_spec(dir.file("m.json"), "matrix", Shape{}, &K);
  auto m = io::read_regularizer(dir.file("m.json"));
  CHECK(m.dual_dim() == 2);
  CHECK(m.signal_dim() == 3);
  CHECK((Eigen::MatrixXd(m.op()) - K).norm() == 0.0);

  CHECK_THROWS(io::regularizer_from_json_text("{\"kind\": \"nope\", \"shape\": [3]}"));
}

TEST_CASE("filter specs and spectra files") {
  TempDir dir;
  FilterSpec spec = FilterSpec::ideal_bandpass(0.25, 0.75, 0.0);
  io::write_filter_spec(dir.file("f.json"), spec);
  auto back = io::read_filter_spec(dir.file("f.json"));
  CHECK(back.kind == FilterKind::bandpass);
  CHECK(back.t1 == 0.25);
  CHECK(back.t2 == 0.75);

  Spectrum s;
  s.kind = SpectrumKind::S3;
  s.atoms = {{0.25, 0.8125}, {1.0, 0.125}};  // exactly representable
  io::write_spectrum(dir.file("s.csv"), s);
  auto text = slurp(dir.file("s.csv"));
  CHECK(text.rfind("t,mass_or_density\n", 0) == 0);
  CHECK(text.find("0.25,0.8125") != std::string::npos);
}

TEST_CASE("PGM export and import") {
  TempDir dir;
  auto img = gen_disks_2d(16, 16, {{8, 8, 4, 1.0}});
  io::write_pgm(dir.file("d.pgm"), img.signal);
  auto back = io::read_pgm(dir.file("d.pgm"));
  CHECK(back.shape.rows == 16);
  CHECK(back.shape.cols == 16);
  // lossy 8-bit format: values land on the 0..1 grid
  CHECK((back.values - img.signal.values).cwiseAbs().maxCoeff() <= 1.0 / 255.0 + 1e-12);
}

TEST_CASE("cli: gen / decompose / recon / filter / verify round trip") {
  TempDir dir;
  io::write_regularizer_spec(dir.file("reg.json"), "tv1d", Shape{5, 1});

  REQUIRE(run_cli("gen --kind spike_1d --n 5 --out " + dir.file("f.csv")) == 0);
  Signal f = io::read_signal(dir.file("f.csv"));
  CHECK(f.values[2] == 1.0);

  REQUIRE(run_cli("decompose --in " + dir.file("f.csv") + " --reg " + dir.file("reg.json") +
                  " --method gf --mode exact --out " + dir.file("dec.json") + " --traj " +
                  dir.file("traj.json")) == 0);
  auto dec = io::read_decomposition(dir.file("dec.json"));
  REQUIRE(dec.atoms.size() == 1);
  CHECK(dec.atoms[0].t == doctest::Approx(0.4).epsilon(1e-9));

  REQUIRE(run_cli("recon --in " + dir.file("dec.json") + " --out " + dir.file("r.csv")) == 0);
  Signal r = io::read_signal(dir.file("r.csv"));
  CHECK((r.values - f.values).norm() <= 1e-8);

  io::write_filter_spec(dir.file("identity.json"), [] {
    FilterSpec s;
    s.kind = FilterKind::custom;
    s.w0 = 1.0;
    s.breakpoints = {{0.0, 1.0}};
    return s;
  }());
  REQUIRE(run_cli("filter --in " + dir.file("dec.json") + " --filter " +
                  dir.file("identity.json") + " --out " + dir.file("flt.csv")) == 0);
  CHECK((io::read_signal(dir.file("flt.csv")).values - f.values).norm() <= 1e-8);

  REQUIRE(run_cli("spectrum --in " + dir.file("traj.json") + " --kind s2 --out " +
                  dir.file("s2.csv")) == 0);
  CHECK(slurp(dir.file("s2.csv")).find("0.8") != std::string::npos);

  CHECK(run_cli("verify --in " + dir.file("f.csv") + " --reg " + dir.file("reg.json") +
                " --out " + dir.file("report.json")) == 0);
  CHECK(slurp(dir.file("report.json")).find("\"pass\": true") != std::string::npos);
}

TEST_CASE("cli: gridded decompositions round-trip through recon for every method") {
  TempDir dir;
  io::write_regularizer_spec(dir.file("reg.json"), "tv1d", Shape{12, 1});
  REQUIRE(run_cli("gen --kind random --n 12 --seed 4 --out " + dir.file("f.csv")) == 0);
  Signal f = io::read_signal(dir.file("f.csv"));
  for (const std::string method : {"gf", "vm", "iss"}) {
    REQUIRE(run_cli("decompose --in " + dir.file("f.csv") + " --reg " + dir.file("reg.json") +
                    " --method " + method + " --mode gridded --grid-points 300 --out " +
                    dir.file("dec_" + method + ".json")) == 0);
    REQUIRE(run_cli("recon --in " + dir.file("dec_" + method + ".json") + " --out " +
                    dir.file("rec_" + method + ".csv")) == 0);
    Signal r = io::read_signal(dir.file("rec_" + method + ".csv"));
    CHECK((r.values - f.values).norm() <= 0.05 * (1.0 + f.norm()));
  }
}

TEST_CASE("cli outputs are byte-identical across runs") {
  TempDir dir;
  io::write_regularizer_spec(dir.file("reg.json"), "tv1d", Shape{16, 1});
  REQUIRE(run_cli("gen --kind random --n 16 --seed 9 --out " + dir.file("a.csv")) == 0);
  REQUIRE(run_cli("gen --kind random --n 16 --seed 9 --out " + dir.file("b.csv")) == 0);
  CHECK(slurp(dir.file("a.csv")) == slurp(dir.file("b.csv")));

  for (const char* out : {"d1.json", "d2.json"})
    REQUIRE(run_cli("decompose --in " + dir.file("a.csv") + " --reg " + dir.file("reg.json") +
                    " --mode exact --out " + dir.file(out)) == 0);
  CHECK(slurp(dir.file("d1.json")) == slurp(dir.file("d2.json")));
}

TEST_CASE("cli: disk generator reports the predicted eigenvalues") {
  TempDir dir;
  const char* cli = std::getenv("SPECDEC_CLI");
  REQUIRE(cli != nullptr);
  const std::string cmd = std::string(cli) +
                          " gen --kind disks_2d --rows 64 --cols 64 --centers 32,32 "
                          "--radii 10 --contrasts 1 --out " +
                          dir.file("disk.csv") + " 2>/dev/null";
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[256];
  while (fgets(buf, sizeof(buf), pipe)) out += buf;
  ::pclose(pipe);
  CHECK(out.find("0.2") != std::string::npos);  // 2/r for r = 10
  CHECK(io::read_signal(dir.file("disk.csv")).shape.rows == 64);
}
