#include "csi/cli.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>

#include "gtest/gtest.h"
#include "support.hpp"

using namespace csitest;
using csi::cli::parse_cli;
using csi::cli::RunConfig;
using csi::cli::UsageError;

namespace {

namespace fs = std::filesystem;

struct Outcome {
  int status = -1;
  std::string out, err;
};

/// Runs the installed binary with `args` through the shell.
Outcome run_tool(const std::string& args, const std::string& env = {}) {
  const auto dir = fs::temp_directory_path();
  const auto out = dir / "csi-cli-stdout.txt", err = dir / "csi-cli-stderr.txt";
  const std::string cmd = env + " '" + std::string(CSI_TOOL_PATH) + "' " + args + " >'" + out.string() + "' 2>'" +
                          err.string() + "'";
  const int raw = std::system(cmd.c_str());
  Outcome o;
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  o.out = read_file(out);
  o.err = read_file(err);
  return o;
}

/// In-process run; returns stdout.
std::string run_in_process(std::vector<std::string> args) {
  std::ostringstream out, err;
  EXPECT_EQ(csi::cli::run(parse_cli(std::move(args)), out, err), 0);
  return out.str();
}

const std::vector<std::string> kSmall{"--lmax", "2", "--pmax", "1", "--grid", "128"};

std::vector<std::string> with_small(std::vector<std::string> args) {
  args.insert(args.begin() + 1, kSmall.begin(), kSmall.end());
  return args;
}

std::vector<std::string> data_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);)
    if (line.rfind("#", 0) != 0) lines.push_back(line);
  return lines;
}

}  // namespace

TEST(parse_cli, defaults) {
  const RunConfig c = parse_cli({"spectrum", "--shape", "star:5"});
  EXPECT_EQ(c.command, "spectrum");
  EXPECT_EQ(c.l_max, 10);
  EXPECT_EQ(c.p_max, 7);
  EXPECT_EQ(c.grid_n, 512);
  EXPECT_EQ(c.half_width, 6.0);
  EXPECT_TRUE(c.renormalize);
  EXPECT_EQ(c.threads, 0u);
  EXPECT_EQ(c.steps, 13);
  EXPECT_EQ(c.step, 0.25);
}

TEST(parse_cli, global_options_may_follow_the_command) {
  const RunConfig c = parse_cli({"sweep", "--shape", "star:5", "--threads", "3", "--out", "/tmp/x", "--no-renormalize"});
  EXPECT_EQ(c.threads, 3u);
  EXPECT_EQ(c.output_dir, "/tmp/x");
  EXPECT_FALSE(c.renormalize);
}

TEST(parse_cli, usage_errors) {
  EXPECT_THROW(parse_cli({"spectrum", "--shape", "star:5", "--pmax", "-1"}), UsageError);
  EXPECT_THROW(parse_cli({"spectrum", "--shape", "star:5", "--bogus"}), UsageError);
  EXPECT_THROW(parse_cli({"spectrum"}), UsageError);
  EXPECT_THROW(parse_cli({}), UsageError);
  EXPECT_THROW(parse_cli({"spectrum", "--shape", "hexagon"}), UsageError);
  EXPECT_THROW(parse_cli({"spectrum", "--shape", "star:5", "--raster", CSI_TEST_DATA_DIR "/jet.pgm"}), UsageError);
  EXPECT_THROW(parse_cli({"rotate-random", "--raster", CSI_TEST_DATA_DIR "/jet.pgm"}), UsageError);
  EXPECT_THROW(parse_cli({"audit", "--shape", "disc"}), UsageError);
  EXPECT_THROW(parse_cli({"catalog", "--item", "=star:5"}), UsageError);
  EXPECT_THROW(parse_cli({"spectrum", "--shape", "star:5", "--source", "laser"}), UsageError);
  EXPECT_THROW(parse_cli({"--help"}), csi::cli::HelpRequested);
}

TEST(parse_cli, config_file) {
  const auto dir = scratch_dir("cli-config");
  write_file(dir / "run.ini", "threads = 2\n[spectrum]\nlmax = 3\npmax = 2\nshape = fan:8\n");
  const RunConfig c = parse_cli({"spectrum", "--config", (dir / "run.ini").string()});
  EXPECT_EQ(c.threads, 2u);
  EXPECT_EQ(c.l_max, 3);
  EXPECT_EQ(c.p_max, 2);
  EXPECT_EQ(c.shape, "fan:8");
}

TEST(tool, exit_statuses) {
  EXPECT_EQ(run_tool("--help").status, 0);
  const Outcome usage = run_tool("spectrum --pmax -1 --shape star:5");
  EXPECT_EQ(usage.status, 2);
  EXPECT_EQ(usage.err.rfind("usage-error: ", 0), 0u) << usage.err;
  const auto dir = scratch_dir("cli-exit");
  const Outcome degenerate = run_tool("spectrum --shape uniform:0 --lmax 1 --pmax 0 --grid 64 --out " + dir.string());
  EXPECT_EQ(degenerate.status, 1);
  EXPECT_EQ(degenerate.err.rfind("degenerate-distribution: ", 0), 0u) << degenerate.err;
  EXPECT_EQ(std::count(degenerate.err.begin(), degenerate.err.end(), '\n'), 1);
  const Outcome missing = run_tool("catalog --item x=pgm:/nonexistent.pgm --lmax 1 --pmax 0 --grid 64 --out " +
                                   dir.string());
  EXPECT_EQ(missing.status, 0);
  EXPECT_NE(missing.out.find("x: io-error"), std::string::npos) << missing.out;
}

TEST(tool, shape_grammar_listing) {
  const Outcome o = run_tool("shapes");
  EXPECT_EQ(o.status, 0);
  EXPECT_NE(o.out.find("star:N"), std::string::npos);
}

TEST(run, amplitudes_are_reproducible_and_headed) {
  const auto a = scratch_dir("cli-amp-a"), b = scratch_dir("cli-amp-b");
  run_in_process(with_small({"amplitudes", "--shape", "star:5", "--out", a.string()}));
  run_in_process(with_small({"amplitudes", "--shape", "star:5", "--out", b.string(), "--threads", "3"}));
  const std::string text = read_file(a / "amplitudes.csv");
  EXPECT_EQ(text, read_file(b / "amplitudes.csv"));
  EXPECT_EQ(read_file(a / "manifest.csv"), read_file(b / "manifest.csv"));
  EXPECT_EQ(text.rfind("# csi=amplitudes\n", 0), 0u);
  EXPECT_NE(text.find("# config_hash="), std::string::npos);
  const auto rows = data_lines(text);
  EXPECT_EQ(rows.front(), "l_out,p_out,l_in,p_in,re,im");
  EXPECT_EQ(rows.size(), 1u + 100u);
}

TEST(run, identity_reconstruction) {
  const auto dir = scratch_dir("cli-recon");
  run_in_process(with_small({"reconstruct", "--shape", "identity", "--resolution", "16", "--out", dir.string()}));
  const Graymap g = read_pgm(read_file(dir / "image.pgm"));
  EXPECT_EQ(g.width, 16);
  EXPECT_EQ(g.comments.front(), " csi=reconstruct");
  // sum of |u|^2 peaks at the centre for this basis and falls towards the corners
  EXPECT_GT(g.at(8, 8), g.at(0, 0));
  EXPECT_EQ(data_lines(read_file(dir / "image.csv")).size(), 1u + 256u);
}

TEST(run, spectrum_artifacts) {
  const auto dir = scratch_dir("cli-spectrum");
  const std::string out = run_in_process(with_small({"spectrum", "--shape", "fan:8", "--out", dir.string()}));
  EXPECT_NE(out.find("mutual_information_bits="), std::string::npos);
  for (const char* name : {"spectrum.csv", "spectrum_collapsed.csv", "offdiag_spectrum.csv", "offdiag_collapsed.csv",
                           "mutual_info.csv", "manifest.csv"})
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  EXPECT_NE(read_file(dir / "spectrum_collapsed.csv").find("# collapse=summed over p_out and p_ref"),
            std::string::npos);
  // the identity has nothing off the diagonal, so only the full spectrum is written
  const auto id = scratch_dir("cli-spectrum-id");
  run_in_process(with_small({"spectrum", "--shape", "identity", "--out", id.string()}));
  EXPECT_FALSE(fs::exists(id / "offdiag_spectrum.csv"));
}

TEST(run, sweep_and_rotation_outputs) {
  const auto dir = scratch_dir("cli-sweep");
  run_in_process(with_small({"sweep", "--shape", "star:5", "--out", dir.string()}));
  EXPECT_EQ(data_lines(read_file(dir / "sweep.csv")).size(), 1u + 13u);

  const auto rot = scratch_dir("cli-rotate");
  run_in_process(with_small({"rotate-random", "--shape", "fan:8", "--seed", "7", "--resolution", "12", "--out",
                             rot.string()}));
  for (const char* name : {"spectrum_fixed.csv", "spectrum_random.csv", "collapsed_random.csv", "image_fixed.pgm",
                           "image_random.pgm", "rotation_report.csv"})
    EXPECT_TRUE(fs::exists(rot / name)) << name;
  EXPECT_NE(read_file(rot / "rotation_report.csv").find("# seed=7"), std::string::npos);
}

TEST(run, every_artifact_carries_the_header) {
  const auto dir = scratch_dir("cli-catalog");
  run_in_process(with_small({"catalog", "--resolution", "12", "--out", dir.string()}));
  int checked = 0;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().filename() == "manifest.csv") continue;
    const std::string text = read_file(entry.path());
    if (entry.path().extension() == ".pgm")
      EXPECT_NE(text.find("# csi=catalog\n"), std::string::npos) << entry.path();
    else
      EXPECT_EQ(text.rfind("# csi=catalog\n", 0), 0u) << entry.path();
    EXPECT_NE(text.find("input_hash="), std::string::npos) << entry.path();
    ++checked;
  }
  EXPECT_GE(checked, 13);
  const std::string summary = read_file(dir / "catalog.csv");
  EXPECT_NE(summary.find("\nempty,0,degenerate-distribution: "), std::string::npos) << summary;
}

TEST(run, output_directory_from_environment) {
  const auto dir = scratch_dir("cli-env");
  ::setenv(csi::cli::kOutputDirEnv, dir.c_str(), 1);
  run_in_process(with_small({"audit", "--shape", "star:5"}));
  ::unsetenv(csi::cli::kOutputDirEnv);
  EXPECT_TRUE(fs::exists(dir / "audit.csv"));
  const Outcome o = run_tool("audit --shape star:5 --lmax 1 --pmax 0 --grid 64", "CSI_OUTPUT_DIR='" + dir.string() + "/tool'");
  EXPECT_EQ(o.status, 0) << o.err;
  EXPECT_TRUE(fs::exists(dir / "tool" / "audit.csv"));
}
