// npl-gen-data: synthetic datasets for the example configs.
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "npl/io/csv.hpp"
#include "npl/synthetic.hpp"

namespace {

void write_column(const std::string& path, const std::vector<npl::VectorPoint>& pts) {
  std::ofstream out(path, std::ios::binary);
  npl::io::write_csv_row(out, {"y"});
  for (const auto& p : pts) npl::io::write_csv_row(out, {npl::io::format_double(p[0])});
}

void write_labeled(const std::string& path, const std::vector<npl::LabeledPoint>& pts) {
  std::ofstream out(path, std::ios::binary);
  std::vector<std::string> header{"y"};
  for (std::size_t j = 0; j < pts.front().x.size(); ++j) header.push_back("x" + std::to_string(j + 1));
  npl::io::write_csv_row(out, header);
  for (const auto& p : pts) {
    std::vector<std::string> row{p.y > 0.5 ? "1" : "0"};
    for (double v : p.x) row.push_back(npl::io::format_double(v));
    npl::io::write_csv_row(out, row);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Synthetic data for npl"};
  app.require_subcommand(1);
  std::string out;
  std::size_t n = 1000, d = 50;
  std::uint64_t seed = 1;

  auto* gmm = app.add_subcommand("toy-gmm", "Three-component 1-d mixture");
  auto* geno = app.add_subcommand("genotype", "Correlated binary-response design");
  auto* normal = app.add_subcommand("normal", "y ~ N(mean, 1)");
  double mean = 1.0;
  normal->add_option("--mean", mean, "Location");
  for (auto* s : {gmm, geno, normal}) {
    s->add_option("--n", n, "Rows")->check(CLI::PositiveNumber);
    s->add_option("--seed", seed, "Seed");
    s->add_option("--out", out, "Output CSV")->required();
  }
  geno->add_option("--d", d, "Covariates")->check(CLI::Range(38, 10000));
  CLI11_PARSE(app, argc, argv);

  npl::Rng rng = npl::make_stream(seed);
  try {
    if (*gmm) {
      write_column(out, npl::synthetic::sample_gmm(npl::synthetic::toy_gmm_truth(), n, rng));
    } else if (*normal) {
      std::vector<npl::VectorPoint> pts(n);
      for (auto& p : pts) p = {mean + npl::standard_normal(rng)};
      write_column(out, pts);
    } else {
      write_labeled(out, npl::synthetic::genotype_like(n, rng, d));
    }
  } catch (const npl::Error& e) {
    std::cerr << e.what() << '\n';
    return 3;
  }
  return 0;
}
