#include "dmdtrain/io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "dmdtrain/errors.hpp"

namespace dmdtrain::io {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw data_error("cannot open for writing: " + path);
  return out;
}

json dataset_config_json(const adr::GeneratorConfig& cfg) {
  const auto& g = cfg.grid;
  return json{{"n", cfg.n},
              {"grid", {{"nx", g.nx}, {"ny", g.ny}, {"x0", g.x0}, {"y0", g.y0}, {"lx", g.lx}, {"ly", g.ly}}},
              {"probe_count", cfg.probe_count},
              {"seed", cfg.seed},
              {"ranges",
               {{"K12", {cfg.ranges.K12.first, cfg.ranges.K12.second}},
                {"K3", {cfg.ranges.K3.first, cfg.ranges.K3.second}},
                {"D", {cfg.ranges.D.first, cfg.ranges.D.second}},
                {"U0", {cfg.ranges.U0.first, cfg.ranges.U0.second}},
                {"uh", {cfg.ranges.uh.first, cfg.ranges.uh.second}},
                {"uv", {cfg.ranges.uv.first, cfg.ranges.uv.second}}}},
              {"eta_max", cfg.eta_max},
              {"n_eta", cfg.n_eta},
              {"paper_uy", cfg.paper_uy},
              {"solve",
               {{"picard_rel_tol", cfg.solve.picard_rel_tol},
                {"residual_tol", cfg.solve.residual_tol},
                {"max_picard", cfg.solve.max_picard},
                {"paper_signs", cfg.solve.paper_signs},
                {"q1_amplitude", cfg.solve.q1_amplitude},
                {"q2_amplitude", cfg.solve.q2_amplitude}}}};
}

adr::GeneratorConfig dataset_config_from_json(const json& j) {
  adr::GeneratorConfig cfg;
  cfg.n = j.at("n").get<int>();
  const auto& g = j.at("grid");
  cfg.grid.nx = g.at("nx").get<int>();
  cfg.grid.ny = g.at("ny").get<int>();
  cfg.grid.x0 = g.at("x0").get<double>();
  cfg.grid.y0 = g.at("y0").get<double>();
  cfg.grid.lx = g.at("lx").get<double>();
  cfg.grid.ly = g.at("ly").get<double>();
  cfg.probe_count = j.at("probe_count").get<int>();
  cfg.seed = j.at("seed").get<std::uint64_t>();
  const auto& r = j.at("ranges");
  auto pair_of = [&](const char* key) {
    return std::pair<double, double>{r.at(key)[0].get<double>(), r.at(key)[1].get<double>()};
  };
  cfg.ranges.K12 = pair_of("K12");
  cfg.ranges.K3 = pair_of("K3");
  cfg.ranges.D = pair_of("D");
  cfg.ranges.U0 = pair_of("U0");
  cfg.ranges.uh = pair_of("uh");
  cfg.ranges.uv = pair_of("uv");
  cfg.eta_max = j.at("eta_max").get<double>();
  cfg.n_eta = j.at("n_eta").get<int>();
  cfg.paper_uy = j.at("paper_uy").get<bool>();
  const auto& s = j.at("solve");
  cfg.solve.picard_rel_tol = s.at("picard_rel_tol").get<double>();
  cfg.solve.residual_tol = s.at("residual_tol").get<double>();
  cfg.solve.max_picard = s.at("max_picard").get<int>();
  cfg.solve.paper_signs = s.at("paper_signs").get<bool>();
  cfg.solve.q1_amplitude = s.at("q1_amplitude").get<double>();
  cfg.solve.q2_amplitude = s.at("q2_amplitude").get<double>();
  return cfg;
}

json matrix_to_json(const RealMatrix& m) {
  json rows = json::array();
  for (int i = 0; i < m.rows; ++i) {
    json row = json::array();
    for (int j = 0; j < m.cols; ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

RealMatrix matrix_from_json(const json& rows) {
  const int r = int(rows.size());
  const int c = r > 0 ? int(rows[0].size()) : 0;
  RealMatrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = rows[i][j].get<double>();
  return m;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_train_log_csv(const std::string& path, const trainer::TrainLog& log) {
  std::ofstream out = open_out(path);
  out << "epoch,train_mse,test_mse,event_flag,relative_error_train,relative_error_test\n";
  std::size_t next_event = 0;
  for (std::size_t e = 0; e < log.train_mse.size(); ++e) {
    out << (e + 1) << ',' << format_double(log.train_mse[e]) << ','
        << format_double(log.test_mse[e]) << ',' << int(log.event_flag[e]);
    if (log.event_flag[e] && next_event < log.events.size()) {
      const auto& ev = log.events[next_event++];
      out << ',' << format_double(ev.relative_error_train) << ','
          << format_double(ev.relative_error_test);
    } else {
      out << ",,";
    }
    out << '\n';
  }
}

void write_sweep_csvs(const std::string& prefix, const trainer::SweepGrid& grid) {
  auto write_grid = [&](const std::string& path, bool train) {
    std::ofstream out = open_out(path);
    out << "m\\s";
    for (int s : grid.s_values) out << ',' << s;
    out << '\n';
    for (std::size_t im = 0; im < grid.m_values.size(); ++im) {
      out << grid.m_values[im];
      for (std::size_t is = 0; is < grid.s_values.size(); ++is) {
        const auto& cell = grid.cells[im][is];
        out << ',' << format_double(train ? cell.mean_rel_train : cell.mean_rel_test);
      }
      out << '\n';
    }
  };
  write_grid(prefix + "_grid_train.csv", true);
  write_grid(prefix + "_grid_test.csv", false);

  std::ofstream out = open_out(prefix + "_long.csv");
  out << "m,s,mean_rel_train,mean_rel_test,final_train_mse,final_test_mse,events,status\n";
  for (std::size_t im = 0; im < grid.m_values.size(); ++im)
    for (std::size_t is = 0; is < grid.s_values.size(); ++is) {
      const auto& cell = grid.cells[im][is];
      out << grid.m_values[im] << ',' << grid.s_values[is] << ','
          << format_double(cell.mean_rel_train) << ',' << format_double(cell.mean_rel_test) << ','
          << format_double(cell.final_train_mse) << ',' << format_double(cell.final_test_mse)
          << ',' << cell.events << ',' << cell.status << '\n';
    }
}

void save_dataset(const std::string& path, const adr::Dataset& ds) {
  json j;
  j["format"] = "dmdtrain-dataset";
  j["version"] = 1;
  j["config"] = dataset_config_json(ds.config);
  json probes = json::array();
  for (const auto& [x, y] : ds.probes) probes.push_back({x, y});
  j["probes"] = std::move(probes);
  j["input_lo"] = ds.input_lo;
  j["input_hi"] = ds.input_hi;
  j["output_max"] = ds.output_max;
  j["inputs"] = matrix_to_json(ds.inputs);
  j["outputs"] = matrix_to_json(ds.outputs);
  j["train_indices"] = ds.train_indices;
  j["test_indices"] = ds.test_indices;
  open_out(path) << j.dump(1) << '\n';
}

adr::Dataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open dataset: " + path);
  json j;
  try {
    in >> j;
    if (j.at("format") != "dmdtrain-dataset") throw data_error("not a dataset file: " + path);
    if (j.at("version") != 1) throw data_error("unsupported dataset version in " + path);
    adr::Dataset ds;
    ds.config = dataset_config_from_json(j.at("config"));
    for (const auto& p : j.at("probes")) ds.probes.emplace_back(p[0].get<double>(), p[1].get<double>());
    ds.input_lo = j.at("input_lo").get<std::vector<double>>();
    ds.input_hi = j.at("input_hi").get<std::vector<double>>();
    ds.output_max = j.at("output_max").get<double>();
    ds.inputs = matrix_from_json(j.at("inputs"));
    ds.outputs = matrix_from_json(j.at("outputs"));
    ds.train_indices = j.at("train_indices").get<std::vector<int>>();
    ds.test_indices = j.at("test_indices").get<std::vector<int>>();
    return ds;
  } catch (const json::exception& e) {
    throw data_error("malformed dataset " + path + ": " + e.what());
  }
}

void export_dataset_csv(const std::string& prefix, const adr::Dataset& ds) {
  {
    std::ofstream out = open_out(prefix + "_inputs.csv");
    out << "K12,K3,D,U0,uh,uv\n";
    for (int i = 0; i < ds.inputs.rows; ++i) {
      for (int d = 0; d < ds.inputs.cols; ++d)
        out << (d ? "," : "") << format_double(ds.inputs(i, d));
      out << '\n';
    }
  }
  std::ofstream out = open_out(prefix + "_outputs.csv");
  for (int i = 0; i < ds.outputs.rows; ++i) {
    for (int k = 0; k < ds.outputs.cols; ++k)
      out << (k ? "," : "") << format_double(ds.outputs(i, k));
    out << '\n';
  }
}

void save_checkpoint(const std::string& path, const trainer::Model& model, std::uint64_t seed) {
  json j;
  j["format"] = "dmdtrain-checkpoint";
  j["version"] = 1;
  j["seed"] = seed;
  j["widths"] = model.spec.widths;
  j["adam"] = {{"lr", model.adam.hp.lr},
               {"beta1", model.adam.hp.beta1},
               {"beta2", model.adam.hp.beta2},
               {"eps", model.adam.hp.eps},
               {"t", model.adam.t}};
  auto layers_json = [&](const std::vector<nn::MLPParams::Layer>& layers) {
    json arr = json::array();
    for (const auto& l : layers)
      arr.push_back({{"weights", matrix_to_json(l.weights)}, {"bias", l.bias}});
    return arr;
  };
  j["layers"] = layers_json(model.params.layers);
  j["adam_m"] = layers_json(model.adam.m);
  j["adam_v"] = layers_json(model.adam.v);
  open_out(path) << j.dump(1) << '\n';
}

trainer::Model load_checkpoint(const std::string& path, std::uint64_t* seed) {
  std::ifstream in(path);
  if (!in) throw data_error("cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
    if (j.at("format") != "dmdtrain-checkpoint")
      throw data_error("not a checkpoint file: " + path);
    if (j.at("version") != 1) throw data_error("unsupported checkpoint version in " + path);
    trainer::Model model;
    model.spec.widths = j.at("widths").get<std::vector<int>>();
    model.adam.hp.lr = j.at("adam").at("lr").get<double>();
    model.adam.hp.beta1 = j.at("adam").at("beta1").get<double>();
    model.adam.hp.beta2 = j.at("adam").at("beta2").get<double>();
    model.adam.hp.eps = j.at("adam").at("eps").get<double>();
    model.adam.t = j.at("adam").at("t").get<long>();
    auto layers_from = [&](const json& arr) {
      std::vector<nn::MLPParams::Layer> layers;
      for (const auto& lj : arr) {
        nn::MLPParams::Layer l;
        l.weights = matrix_from_json(lj.at("weights"));
        l.bias = lj.at("bias").get<std::vector<double>>();
        layers.push_back(std::move(l));
      }
      return layers;
    };
    model.params.layers = layers_from(j.at("layers"));
    model.adam.m = layers_from(j.at("adam_m"));
    model.adam.v = layers_from(j.at("adam_v"));
    if (seed) *seed = j.at("seed").get<std::uint64_t>();
    return model;
  } catch (const json::exception& e) {
    throw data_error("malformed checkpoint " + path + ": " + e.what());
  }
}

void write_manifest(const std::string& path, const std::string& json_text) {
  open_out(path) << json_text << '\n';
}

void write_blasius_csv(const std::string& path, const adr::BlasiusSolution& sol) {
  std::ofstream out = open_out(path);
  out << "eta,f,fp,fpp\n";
  for (std::size_t i = 0; i < sol.eta.size(); ++i)
    out << format_double(sol.eta[i]) << ',' << format_double(sol.f[i]) << ','
        << format_double(sol.fp[i]) << ',' << format_double(sol.fpp[i]) << '\n';
}

DirectorySnapshotSink::DirectorySnapshotSink(std::string dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(dir_);
}

void DirectorySnapshotSink::on_snapshot(int epoch, int layer, const RealMatrix& w) {
  std::ostringstream name;
  name << dir_ << "/snapshots_epoch" << epoch << "_layer" << layer << ".csv";
  std::ofstream out = open_out(name.str());
  out << "n,m,layer_id\n" << w.rows << ',' << w.cols << ',' << layer << '\n';
  // Column-major: one snapshot (matrix column) per line.
  for (int j = 0; j < w.cols; ++j) {
    for (int i = 0; i < w.rows; ++i) out << (i ? "," : "") << format_double(w(i, j));
    out << '\n';
  }
}

}  // namespace dmdtrain::io
