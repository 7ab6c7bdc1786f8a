#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "dmdtrain/adr.hpp"
#include "dmdtrain/errors.hpp"
#include "dmdtrain/io.hpp"
#include "dmdtrain/kernels.hpp"
#include "dmdtrain/linalg.hpp"
#include "dmdtrain/nn.hpp"
#include "dmdtrain/trainer.hpp"

namespace {

using json = nlohmann::json;
using namespace dmdtrain;

constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitNumerical = 3;

struct GenerateOpts {
  adr::GeneratorConfig cfg;
  std::string out;
  bool export_csv = false;
  std::vector<double> r_k12, r_k3, r_d, r_u0, r_uh, r_uv;
  bool paper_ranges = false;
};

struct TrainOpts {
  std::string data;
  std::string out = "run";
  std::vector<int> hidden = {16, 32, 64};
  trainer::TrainConfig cfg;
  bool no_dmd = false;
  std::string snapshot_dir;
};

struct SweepOpts {
  std::string data;
  std::string out = "sweep";
  std::vector<int> hidden = {16, 32, 64};
  std::vector<int> m_values = {2, 5, 8, 11, 14, 17, 20};
  std::vector<int> s_values = {5, 20, 40, 55, 70, 85, 100};
  trainer::TrainConfig cfg;
};

struct BlasiusOpts {
  adr::ADRParams params;
  double eta_max = 10.0;
  int n_eta = 2000;
  std::string out;
};

struct ReportOpts {
  std::string log;
  std::string snapshot_dir;
};

void apply_range(std::pair<double, double>& dst, const std::vector<double>& src,
                 const char* name) {
  if (src.empty()) return;
  if (src.size() != 2 || !(src[1] >= src[0])) {
    std::ostringstream os;
    os << name << ": expects LO HI with HI >= LO";
    throw std::invalid_argument(os.str());
  }
  dst = {src[0], src[1]};
}

json ranges_json(const adr::SampleRanges& r) {
  return json{{"K12", {r.K12.first, r.K12.second}}, {"K3", {r.K3.first, r.K3.second}},
              {"D", {r.D.first, r.D.second}},       {"U0", {r.U0.first, r.U0.second}},
              {"uh", {r.uh.first, r.uh.second}},    {"uv", {r.uv.first, r.uv.second}}};
}

json train_config_json(const trainer::TrainConfig& cfg) {
  return json{{"m", cfg.m},
              {"s", cfg.s},
              {"dmd_tol", cfg.dmd_tol},
              {"total_epochs", cfg.total_epochs},
              {"dmd_enabled", cfg.dmd_enabled},
              {"reset_adam_after_dmd", cfg.reset_adam_after_dmd},
              {"snapshot_biases", cfg.snapshot_biases},
              {"seed", cfg.seed},
              {"adam",
               {{"lr", cfg.adam.lr},
                {"beta1", cfg.adam.beta1},
                {"beta2", cfg.adam.beta2},
                {"eps", cfg.adam.eps}}},
              {"dmd_options",
               {{"exact_modes", cfg.dmd_options.exact_modes},
                {"ls_amplitudes", cfg.dmd_options.ls_amplitudes},
                {"clamp_unstable", cfg.dmd_options.clamp_unstable}}}};
}

int run_generate(GenerateOpts& o, int threads) {
  if (o.paper_ranges) {
    o.cfg.ranges.U0 = {0.01, 2.0};
    o.cfg.ranges.uh = {-0.2, 0.2};
    o.cfg.ranges.uv = {-0.2, 0.2};
  }
  apply_range(o.cfg.ranges.K12, o.r_k12, "--range-k12");
  apply_range(o.cfg.ranges.K3, o.r_k3, "--range-k3");
  apply_range(o.cfg.ranges.D, o.r_d, "--range-d");
  apply_range(o.cfg.ranges.U0, o.r_u0, "--range-u0");
  apply_range(o.cfg.ranges.uh, o.r_uh, "--range-uh");
  apply_range(o.cfg.ranges.uv, o.r_uv, "--range-uv");
  o.cfg.grid.validate();
  if (o.cfg.n < 10) throw std::invalid_argument("n: must be >= 10");
  if (o.cfg.probe_count < 1) throw std::invalid_argument("probes: must be >= 1");

  const adr::Dataset ds = adr::build_dataset(o.cfg);
  io::save_dataset(o.out, ds);
  if (o.export_csv) io::export_dataset_csv(o.out, ds);

  json manifest{{"command", "generate"},
                {"version", 1},
                {"threads", threads},
                {"out", o.out},
                {"n", o.cfg.n},
                {"probe_count", o.cfg.probe_count},
                {"seed", o.cfg.seed},
                {"grid",
                 {{"nx", o.cfg.grid.nx},
                  {"ny", o.cfg.grid.ny},
                  {"x0", o.cfg.grid.x0},
                  {"y0", o.cfg.grid.y0},
                  {"lx", o.cfg.grid.lx},
                  {"ly", o.cfg.grid.ly}}},
                {"ranges", ranges_json(o.cfg.ranges)},
                {"eta_max", o.cfg.eta_max},
                {"n_eta", o.cfg.n_eta}};
  io::write_manifest(o.out + ".manifest.json", manifest.dump(1));
  std::cout << "wrote " << ds.inputs.rows << " samples, " << ds.outputs.cols << " probes to "
            << o.out << "\n";
  return 0;
}

trainer::Model build_model(const std::vector<int>& hidden, const adr::Dataset& ds,
                           const trainer::TrainConfig& cfg) {
  nn::MLPSpec spec;
  spec.widths.push_back(ds.inputs.cols);
  spec.widths.insert(spec.widths.end(), hidden.begin(), hidden.end());
  spec.widths.push_back(ds.outputs.cols);
  spec.validate(/*require_hidden=*/true);
  trainer::Model model;
  model.spec = spec;
  model.params = nn::xavier_init(spec, cfg.seed);
  model.adam = nn::make_adam_state(spec, cfg.adam);
  return model;
}

int run_train(TrainOpts& o, int threads) {
  o.cfg.dmd_enabled = !o.no_dmd;
  o.cfg.validate();

  const adr::Dataset ds = io::load_dataset(o.data);
  trainer::Model model = build_model(o.hidden, ds, o.cfg);
  const trainer::DataSplit split = ds.to_split();

  std::unique_ptr<io::DirectorySnapshotSink> sink;
  if (!o.snapshot_dir.empty()) sink = std::make_unique<io::DirectorySnapshotSink>(o.snapshot_dir);

  const trainer::TrainLog log = trainer::train(model, split, o.cfg, sink.get());
  io::write_train_log_csv(o.out + "_log.csv", log);
  io::save_checkpoint(o.out + "_checkpoint.json", model, o.cfg.seed);

  json manifest{{"command", "train"},  {"version", 1},
                {"threads", threads},  {"data", o.data},
                {"out", o.out},        {"hidden", o.hidden},
                {"snapshot_dir", o.snapshot_dir},
                {"train", train_config_json(o.cfg)}};
  io::write_manifest(o.out + ".manifest.json", manifest.dump(1));

  std::cout << "final train MSE " << io::format_double(log.train_mse.back()) << ", test MSE "
            << io::format_double(log.test_mse.back()) << "\n";
  if (!log.events.empty()) {
    std::cout << log.events.size() << " DMD events, mean relative error "
              << io::format_double(trainer::mean_relative_error(log, trainer::Split::train))
              << " (train) / "
              << io::format_double(trainer::mean_relative_error(log, trainer::Split::test))
              << " (test)\n";
  }
  std::cout << "phase seconds: backprop " << log.backprop_seconds << ", dmd " << log.dmd_seconds
            << ", eval " << log.eval_seconds << "\n";
  return 0;
}

int run_sweep(SweepOpts& o, int threads) {
  if (o.m_values.empty() || o.s_values.empty())
    throw std::invalid_argument("m/s: sweep lists must be non-empty");
  o.cfg.dmd_enabled = true;

  const adr::Dataset ds = io::load_dataset(o.data);
  nn::MLPSpec spec;
  spec.widths.push_back(ds.inputs.cols);
  spec.widths.insert(spec.widths.end(), o.hidden.begin(), o.hidden.end());
  spec.widths.push_back(ds.outputs.cols);
  spec.validate(/*require_hidden=*/true);

  const trainer::SweepGrid grid =
      trainer::sweep(spec, ds.to_split(), o.m_values, o.s_values, o.cfg);
  io::write_sweep_csvs(o.out, grid);

  json manifest{{"command", "sweep"},   {"version", 1},      {"threads", threads},
                {"data", o.data},       {"out", o.out},      {"hidden", o.hidden},
                {"m_values", o.m_values}, {"s_values", o.s_values},
                {"train", train_config_json(o.cfg)}};
  io::write_manifest(o.out + ".manifest.json", manifest.dump(1));
  std::cout << "wrote " << o.m_values.size() << "x" << o.s_values.size() << " sweep grids to "
            << o.out << "_*.csv\n";
  return 0;
}

int run_blasius(BlasiusOpts& o, int threads) {
  const adr::BlasiusSolution sol = adr::solve_blasius(o.params, o.eta_max, o.n_eta);
  std::cout << "f''(0) = " << io::format_double(sol.fpp0) << "\n";
  std::cout << "f'(eta_max) = " << io::format_double(sol.fp.back()) << "\n";
  if (!o.out.empty()) {
    io::write_blasius_csv(o.out, sol);
    json manifest{{"command", "blasius"}, {"version", 1},      {"threads", threads},
                  {"out", o.out},         {"U0", o.params.U0}, {"uh", o.params.uh},
                  {"uv", o.params.uv},    {"nu", o.params.nu}, {"eta_max", o.eta_max},
                  {"n_eta", o.n_eta}};
    io::write_manifest(o.out + ".manifest.json", manifest.dump(1));
  }
  return 0;
}

int run_report(ReportOpts& o) {
  std::ifstream in(o.log);
  if (!in) throw data_error("cannot open log: " + o.log);
  std::string line;
  if (!std::getline(in, line)) throw data_error("empty log: " + o.log);

  int epochs = 0, events = 0;
  double final_train = 0.0, final_test = 0.0;
  double sum_rel_train = 0.0, sum_rel_test = 0.0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    cells.resize(6);
    ++epochs;
    final_train = std::stod(cells[1]);
    final_test = std::stod(cells[2]);
    if (cells[3] == "1" && !cells[4].empty()) {
      ++events;
      sum_rel_train += std::stod(cells[4]);
      sum_rel_test += std::stod(cells[5]);
    }
  }
  std::cout << "epochs: " << epochs << "\n";
  std::cout << "final train MSE: " << io::format_double(final_train) << "\n";
  std::cout << "final test MSE:  " << io::format_double(final_test) << "\n";
  std::cout << "DMD events: " << events << "\n";
  if (events > 0) {
    std::cout << "mean relative error (train): " << io::format_double(sum_rel_train / events)
              << "\n";
    std::cout << "mean relative error (test):  " << io::format_double(sum_rel_test / events)
              << "\n";
  }

  if (!o.snapshot_dir.empty()) {
    namespace fs = std::filesystem;
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(o.snapshot_dir))
      if (entry.path().extension() == ".csv") files.push_back(entry.path().string());
    std::sort(files.begin(), files.end());
    for (const auto& path : files) {
      std::ifstream snap(path);
      std::string header, dims;
      if (!std::getline(snap, header) || !std::getline(snap, dims)) continue;
      std::stringstream ds(dims);
      int n = 0, m = 0, layer = 0;
      char comma;
      ds >> n >> comma >> m >> comma >> layer;
      RealMatrix w(n, m);
      for (int j = 0; j < m; ++j) {
        if (!std::getline(snap, line)) break;
        std::stringstream row(line);
        std::string value;
        for (int i = 0; i < n; ++i) {
          std::getline(row, value, ',');
          w(i, j) = std::stod(value);
        }
      }
      const linalg::SVDFactors svd = linalg::gram_svd(w, 1e-13);
      std::cout << fs::path(path).filename().string() << ": layer " << layer << ", n=" << n
                << ", m=" << m << ", leading sigma ratios";
      for (int k = 0; k < std::min(3, svd.rank); ++k)
        std::cout << ' ' << io::format_double(svd.sigma[k] / svd.sigma[0]);
      std::cout << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DMD-accelerated feed-forward network training toolkit"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI-style config file");
  int threads = 0;
  app.add_option("--threads", threads, "OpenMP thread count (0 keeps the runtime default)");

  GenerateOpts gen;
  auto* cgen = app.add_subcommand("generate", "build and save a dispersion regression dataset");
  cgen->add_option("--n", gen.cfg.n, "number of LHS samples")->capture_default_str();
  cgen->add_option("--seed", gen.cfg.seed, "RNG seed")->capture_default_str();
  cgen->add_option("--out", gen.out, "output dataset path")->required();
  cgen->add_option("--probes", gen.cfg.probe_count, "probe count")->capture_default_str();
  cgen->add_option("--nx", gen.cfg.grid.nx, "grid nodes in x")->capture_default_str();
  cgen->add_option("--ny", gen.cfg.grid.ny, "grid nodes in y")->capture_default_str();
  cgen->add_option("--eta-max", gen.cfg.eta_max, "similarity grid extent")->capture_default_str();
  cgen->add_option("--n-eta", gen.cfg.n_eta, "similarity grid intervals")->capture_default_str();
  cgen->add_flag("--csv", gen.export_csv, "also export inputs/outputs CSVs");
  cgen->add_flag("--paper-ranges", gen.paper_ranges,
                 "sample the full published parameter ranges (solver failures likely)");
  cgen->add_option("--range-k12", gen.r_k12, "K12 range LO HI")->expected(2);
  cgen->add_option("--range-k3", gen.r_k3, "K3 range LO HI")->expected(2);
  cgen->add_option("--range-d", gen.r_d, "D range LO HI")->expected(2);
  cgen->add_option("--range-u0", gen.r_u0, "U0 range LO HI")->expected(2);
  cgen->add_option("--range-uh", gen.r_uh, "uh range LO HI")->expected(2);
  cgen->add_option("--range-uv", gen.r_uv, "uv range LO HI")->expected(2);

  TrainOpts tr;
  auto* ctrain = app.add_subcommand("train", "train an MLP with optional DMD acceleration");
  ctrain->add_option("--data", tr.data, "dataset path")->required();
  ctrain->add_option("--out", tr.out, "output prefix")->capture_default_str();
  ctrain->add_option("--epochs", tr.cfg.total_epochs, "total epochs")->capture_default_str();
  ctrain->add_option("--m", tr.cfg.m, "snapshots per DMD fit")->capture_default_str();
  ctrain->add_option("--s", tr.cfg.s, "DMD extrapolation steps")->capture_default_str();
  ctrain->add_option("--dmd-tol", tr.cfg.dmd_tol, "DMD filter tolerance")->capture_default_str();
  ctrain->add_flag("--no-dmd", tr.no_dmd, "plain Adam baseline");
  ctrain->add_option("--seed", tr.cfg.seed, "RNG seed")->capture_default_str();
  ctrain->add_option("--lr", tr.cfg.adam.lr, "Adam learning rate")->capture_default_str();
  ctrain->add_option("--beta1", tr.cfg.adam.beta1, "Adam beta1")->capture_default_str();
  ctrain->add_option("--beta2", tr.cfg.adam.beta2, "Adam beta2")->capture_default_str();
  ctrain->add_option("--eps", tr.cfg.adam.eps, "Adam epsilon")->capture_default_str();
  ctrain->add_option("--arch", tr.hidden, "hidden layer widths")
      ->delimiter(',')
      ->capture_default_str();
  ctrain->add_flag("--reset-adam", tr.cfg.reset_adam_after_dmd,
                   "reset optimizer moments after each DMD event");
  ctrain->add_flag("--no-snapshot-biases{false}", tr.cfg.snapshot_biases,
                   "exclude biases from weight snapshots");
  ctrain->add_flag("--exact-modes", tr.cfg.dmd_options.exact_modes,
                   "exact-DMD mode construction");
  ctrain->add_flag("--ls-amplitudes", tr.cfg.dmd_options.ls_amplitudes,
                   "least-squares DMD amplitudes");
  ctrain->add_flag("--clamp-unstable", tr.cfg.dmd_options.clamp_unstable,
                   "rescale unstable eigenvalues to unit modulus");
  ctrain->add_option("--dump-snapshots", tr.snapshot_dir,
                     "write per-layer snapshot matrices to this directory");

  SweepOpts sw;
  auto* csweep = app.add_subcommand("sweep", "m/s sensitivity sweep");
  csweep->add_option("--data", sw.data, "dataset path")->required();
  csweep->add_option("--out", sw.out, "output prefix")->capture_default_str();
  csweep->add_option("--m", sw.m_values, "m values")->delimiter(',')->capture_default_str();
  csweep->add_option("--s", sw.s_values, "s values")->delimiter(',')->capture_default_str();
  csweep->add_option("--epochs", sw.cfg.total_epochs, "epochs per cell")->capture_default_str();
  csweep->add_option("--seed", sw.cfg.seed, "RNG seed")->capture_default_str();
  csweep->add_option("--dmd-tol", sw.cfg.dmd_tol, "DMD filter tolerance")->capture_default_str();
  csweep->add_option("--lr", sw.cfg.adam.lr, "Adam learning rate")->capture_default_str();
  csweep->add_option("--arch", sw.hidden, "hidden layer widths")
      ->delimiter(',')
      ->capture_default_str();

  BlasiusOpts bl;
  auto* cblasius = app.add_subcommand("blasius", "solve one boundary-layer profile");
  cblasius->add_option("--u0", bl.params.U0, "free-stream speed")->capture_default_str();
  cblasius->add_option("--uh", bl.params.uh, "ground slip velocity")->capture_default_str();
  cblasius->add_option("--uv", bl.params.uv, "ground vertical velocity")->capture_default_str();
  cblasius->add_option("--nu", bl.params.nu, "kinematic viscosity")->capture_default_str();
  cblasius->add_option("--eta-max", bl.eta_max, "grid extent")->capture_default_str();
  cblasius->add_option("--n-eta", bl.n_eta, "grid intervals")->capture_default_str();
  cblasius->add_option("--out", bl.out, "CSV dump path");

  ReportOpts rp;
  auto* creport = app.add_subcommand("report", "summarize a training log");
  creport->add_option("--log", rp.log, "training log CSV")->required();
  creport->add_option("--snapshots", rp.snapshot_dir, "snapshot dump directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsage;
  }

  if (threads > 0) kernels::set_threads(threads);

  try {
    if (*cgen) return run_generate(gen, threads);
    if (*ctrain) return run_train(tr, threads);
    if (*csweep) return run_sweep(sw, threads);
    if (*cblasius) return run_blasius(bl, threads);
    if (*creport) return run_report(rp);
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid configuration: " << e.what() << "\n";
    return kExitUsage;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const numeric_error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
