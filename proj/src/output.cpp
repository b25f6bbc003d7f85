#include "magcat/output.hpp"

#include <charconv>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <openssl/evp.h>

#ifndef MAGCAT_VERSION
#define MAGCAT_VERSION "unknown"
#endif

namespace magcat {

namespace fs = std::filesystem;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

void row(std::ostream& out, const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out << ',';
    out << format_number(values[i]);
  }
  out << '\n';
}

}  // namespace

void write_trajectory_csv(const fs::path& path, const Trajectory& t) {
  auto out = open_out(path);
  out << "t_us,gamma_t,fidelity,parity,n_mean,var_x1,var_x2,p_excited\n";
  for (std::size_t k = 0; k < t.times.size(); ++k) {
    row(out, {t.times[k], t.gamma_t[k], t.fidelity[k], t.parity[k], t.n_mean[k], t.var_x1[k], t.var_x2[k], t.p_excited[k]});
  }
}

void write_wigner_csv(const fs::path& path, const WignerGrid& grid) {
  auto out = open_out(path);
  out << "re_min,re_max,re_n,im_min,im_max,im_n\n";
  row(out, {grid.re.min, grid.re.max, static_cast<double>(grid.re.n), grid.im.min, grid.im.max, static_cast<double>(grid.im.n)});
  for (Eigen::Index i = 0; i < grid.values.rows(); ++i) {
    std::vector<double> r(grid.values.cols());
    for (Eigen::Index j = 0; j < grid.values.cols(); ++j) r[j] = grid.values(i, j);
    row(out, r);
  }
}

void write_sweep_csv(const fs::path& path, const std::string& axis, const std::vector<SweepRow>& rows) {
  auto out = open_out(path);
  out << "index," << axis << "_mhz,max_fidelity,argmax_gamma_t,final_fidelity,alpha_abs,status\n";
  for (const auto& r : rows) {
    out << r.index << ',' << format_number(r.value) << ',' << format_number(r.max_fidelity) << ','
        << format_number(r.argmax_gamma_t) << ',' << format_number(r.final_fidelity) << ',' << format_number(r.alpha_abs)
        << ',' << (r.ok ? "ok" : "failed") << '\n';
  }
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<std::size_t>(in.gcount()));
  }
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return hex.str();
}

json diagnostics_json(const Diagnostics& d) {
  return json{{"ok", d.ok},
              {"message", d.message},
              {"steps", d.steps},
              {"rejected", d.rejected},
              {"rhs_evals", d.rhs_evals},
              {"max_trace_drift", d.max_trace_drift},
              {"max_hermiticity_drift", d.max_hermiticity_drift},
              {"min_eigenvalue", d.min_eigenvalue}};
}

json steady_json(const SteadySummary& s) {
  json j{{"residual", s.residual},
         {"fidelity", s.fidelity},
         {"normalized_fidelity", s.normalized_fidelity},
         {"even_weight", s.even_weight},
         {"odd_weight", s.odd_weight},
         {"p_excited", s.p_excited},
         {"recursion_residual", s.recursion_residual}};
  if (s.verdict) {
    j["verdict"] = {{"distance_coherent", s.verdict->distance_coherent},
                    {"distance_mixture", s.verdict->distance_mixture},
                    {"closer", s.verdict->closer},
                    {"fringe_segment_max", s.verdict->fringes.segment_max},
                    {"fringe_grid_max", s.verdict->fringes.grid_max},
                    {"fringes_cancelled", s.verdict->fringes.cancelled},
                    {"fringe_threshold", kFringeThreshold}};
  }
  if (s.wigner) j["wigner_dim"] = s.wigner_dim;
  return j;
}

Manifest::Manifest(fs::path dir, const ScenarioConfig& config, const Model& model) : dir_(std::move(dir)) {
  body_["version"] = MAGCAT_VERSION;
  body_["config"] = to_json(config);
  body_["derived"] = to_json(model.derived);
  body_["conventions"] = {
      {"wigner", "W(beta) = (2/pi) Tr[D(beta)^dag rho D(beta) P]"},
      {"frame", "observables are measured in the effective (interaction) frame; qubit index 0 is the dressed down state"},
      {"fidelity", "Tr[rho_target rho_magnon]"},
      {"time_axis", "gamma_t = gamma * t; a Gamma t axis label is read as the same quantity"}};
  body_["files"] = json::array();
}

void Manifest::add_file(const std::string& name, const std::string& kind) {
  const fs::path p = dir_ / name;
  body_["files"].push_back({{"name", name}, {"kind", kind}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
}

void Manifest::write() const { write_text(dir_ / "manifest.json", body_.dump(2) + "\n"); }

bool verify_manifest(const fs::path& dir, std::string* problem) {
  std::ifstream in(dir / "manifest.json");
  if (!in) {
    if (problem) *problem = "manifest.json missing";
    return false;
  }
  const json j = json::parse(in);
  for (const auto& f : j.at("files")) {
    const fs::path p = dir / f.at("name").get<std::string>();
    if (!fs::exists(p) || sha256_file(p) != f.at("sha256").get<std::string>()) {
      if (problem) *problem = "digest mismatch for " + p.filename().string();
      return false;
    }
  }
  return true;
}

}  // namespace magcat
