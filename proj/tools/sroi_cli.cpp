// sroi: subdivide a binary region into equal-area, shape-following parts.
//
//   sroi subdivide  --input mask.pgm --k 16 --output labels.pgm [--dump dir]
//   sroi centerline --input mask.pgm --output centerline.csv
//   sroi stats      --input labels.pgm
//
// Exit codes: 0 ok, 1 usage/parse/IO, 2 invalid input, 3 algorithm failure.

#include <climits>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <unistd.h>

#include "CLI11.hpp"
#include "sroi/sroi.hpp"

namespace fs = std::filesystem;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) sroi::fail(sroi::ErrorKind::kParse, "cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) sroi::fail(sroi::ErrorKind::kParse, "error reading '" + path + "'");
  return ss.str();
}

// Writes via a sibling temporary and rename so a failed write never leaves a
// partial file at `path`.
void write_file(const fs::path& path, const std::string& bytes) {
  fs::path tmp = path;
  tmp += ".tmp" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) sroi::fail(sroi::ErrorKind::kParse, "cannot open '" + tmp.string() + "' for writing");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      sroi::fail(sroi::ErrorKind::kParse, "error writing '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    sroi::fail(sroi::ErrorKind::kParse, "cannot move output into place at '" + path.string() + "'");
  }
}

int exit_code(sroi::ErrorKind kind) {
  switch (kind) {
    case sroi::ErrorKind::kParse: return 1;
    case sroi::ErrorKind::kValidation: return 2;
    case sroi::ErrorKind::kAlgorithm: return 3;
  }
  return 3;
}

struct SubdivideArgs {
  std::string input;
  std::string output;
  std::string dump;
  int k = 1;
  double exponent = 6.0;
  bool no_balance = false;
};

struct CenterlineArgs {
  std::string input;
  std::string output;
  double exponent = 6.0;
};

struct StatsArgs {
  std::string input;
};

void run_subdivide(const SubdivideArgs& args) {
  const sroi::BinaryMask mask = sroi::read_mask(read_file(args.input));
  sroi::SubdivisionOptions options;
  options.centerline.exponent = args.exponent;
  options.balance = !args.no_balance;
  const auto result = sroi::run_subdivision(mask, args.k, options);

  const std::string labels = sroi::write_labelmap(result.labels);
  if (!args.dump.empty()) {
    const fs::path dir(args.dump);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) sroi::fail(sroi::ErrorKind::kParse, "cannot create dump directory '" + args.dump + "'");
    write_file(dir / "distance.csv", sroi::write_field_csv(result.centerline.distance));
    write_file(dir / "arrival1.csv", sroi::write_field_csv(result.centerline.first_wave.values));
    write_file(dir / "arrival2.csv", sroi::write_field_csv(result.centerline.arrival.values));
    write_file(dir / "centerline.csv", sroi::write_path_csv(result.centerline.path));
    write_file(dir / "cuts.csv", sroi::write_cuts_csv(result.cuts));
    write_file(dir / "stats.jsonl",
               sroi::write_stats_jsonl(sroi::region_stats(result.labels)));
  }
  write_file(args.output, labels);
}

void run_centerline(const CenterlineArgs& args) {
  const sroi::BinaryMask mask = sroi::read_mask(read_file(args.input));
  sroi::CenterlineOptions options;
  options.exponent = args.exponent;
  const auto centerline = sroi::extract_centerline(mask, options);
  write_file(args.output, sroi::write_path_csv(centerline.path));
}

void run_stats(const StatsArgs& args) {
  const sroi::LabelMap labels = sroi::read_labelmap(read_file(args.input));
  std::cout << sroi::write_stats_jsonl(sroi::region_stats(labels));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equal-area, shape-following subdivision of binary regions"};
  app.require_subcommand(1);

  SubdivideArgs sub;
  auto* subdivide = app.add_subcommand("subdivide", "Split a mask into k labeled regions");
  subdivide->add_option("--input", sub.input, "Mask graymap (P2 or P5)")->required();
  subdivide->add_option("--k", sub.k, "Number of regions")
      ->required()
      ->check(CLI::Range(1, INT_MAX));
  subdivide->add_option("--output", sub.output, "Label map graymap (P2)")->required();
  subdivide->add_option("--dump", sub.dump, "Directory for intermediate fields and stats");
  subdivide->add_option("--exponent", sub.exponent, "Depth weighting exponent of the second wave")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  subdivide->add_flag("--no-balance", sub.no_balance, "Skip equal-area balancing");

  CenterlineArgs cl;
  auto* centerline = app.add_subcommand("centerline", "Write the centerline as x,y lines");
  centerline->add_option("--input", cl.input, "Mask graymap (P2 or P5)")->required();
  centerline->add_option("--output", cl.output, "CSV output")->required();
  centerline->add_option("--exponent", cl.exponent, "Depth weighting exponent")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);

  StatsArgs st;
  auto* stats = app.add_subcommand("stats", "Per-label statistics as JSON lines");
  stats->add_option("--input", st.input, "Label map graymap")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    std::cerr << (app.got_subcommand(subdivide)    ? subdivide->help()
                  : app.got_subcommand(centerline) ? centerline->help()
                  : app.got_subcommand(stats)      ? stats->help()
                                                   : app.help());
    return 1;
  }

  try {
    if (*subdivide) run_subdivide(sub);
    if (*centerline) run_centerline(cl);
    if (*stats) run_stats(st);
  } catch (const sroi::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
