#include "mtac/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "mtac/csv.hpp"
#include "mtac/errors.hpp"

namespace mtac {

namespace {

void write_tensor(std::ofstream& out, const std::string& name, int rows, int cols,
                  const std::vector<double>& values) {
  out << "tensor " << name << ' ' << rows << ' ' << cols << "\n";
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      if (c) out << ' ';
      out << fmt_g17(values[static_cast<std::size_t>(r) * cols + c]);
    }
    out << "\n";
  }
}

std::vector<double> read_tensor(std::istream& in, const std::string& expect_name, int expect_rows,
                                int expect_cols, const std::filesystem::path& path) {
  std::string tag, name;
  int rows = 0, cols = 0;
  if (!(in >> tag >> name >> rows >> cols) || tag != "tensor" || name != expect_name) {
    throw ValidationError("checkpoint " + path.string() + ": expected tensor " + expect_name);
  }
  if (rows != expect_rows || cols != expect_cols) {
    throw ValidationError("checkpoint " + path.string() + ": tensor " + expect_name +
                          " has shape " + std::to_string(rows) + "x" + std::to_string(cols) +
                          ", expected " + std::to_string(expect_rows) + "x" +
                          std::to_string(expect_cols));
  }
  std::vector<double> values(static_cast<std::size_t>(rows) * cols);
  for (double& v : values) {
    if (!(in >> v)) {
      throw ValidationError("checkpoint " + path.string() + ": truncated tensor " + expect_name);
    }
  }
  return values;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint: " + path.string());
  const NetworkConfig& cfg = ckpt.net.cfg;
  out << "mtac-ckpt 1\n";
  out << "variant " << variant_to_string(ckpt.variant) << "\n";
  out << "version " << ckpt.net.version << "\n";
  out << "obs_dim " << cfg.obs_dim << "\n";
  out << "hidden " << cfg.hidden << "\n";
  out << "actions " << cfg.actions << "\n";
  out << "value_heads " << cfg.value_heads << "\n";
  write_tensor(out, "trunk_weights", cfg.hidden, cfg.obs_dim, ckpt.net.w1);
  write_tensor(out, "trunk_bias", 1, cfg.hidden, ckpt.net.b1);
  write_tensor(out, "policy_weights", cfg.actions, cfg.hidden, ckpt.net.wp);
  write_tensor(out, "policy_bias", 1, cfg.actions, ckpt.net.bp);
  write_tensor(out, "value_weights", cfg.value_heads, cfg.hidden, ckpt.net.wv);
  write_tensor(out, "value_bias", 1, cfg.value_heads, ckpt.net.bv);
  out << "stats " << ckpt.stats.size() << "\n";
  for (std::size_t i = 0; i < ckpt.stats.size(); ++i) {
    const NormStats& s = ckpt.stats[i];
    out << i << ' ' << fmt_g17(s.mu) << ' ' << fmt_g17(s.nu) << ' ' << fmt_g17(s.beta) << ' '
        << fmt_g17(s.sigma_lo) << ' ' << fmt_g17(s.sigma_hi) << "\n";
  }
  out << "end\n";
  if (!out) throw IoError("failed writing checkpoint: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open checkpoint: " + path.string());
  std::string magic;
  int fmt_version = 0;
  if (!(in >> magic >> fmt_version) || magic != "mtac-ckpt" || fmt_version != 1) {
    throw ValidationError("checkpoint " + path.string() + ": not a recognized checkpoint file");
  }
  Checkpoint ckpt;
  std::string key, variant_name;
  NetworkConfig cfg;
  std::uint64_t net_version = 0;
  auto expect_key = [&in, &key, &path](const std::string& want) {
    if (!(in >> key) || key != want) {
      throw ValidationError("checkpoint " + path.string() + ": expected field " + want);
    }
  };
  expect_key("variant");
  in >> variant_name;
  ckpt.variant = variant_from_string(variant_name);
  expect_key("version");
  in >> net_version;
  expect_key("obs_dim");
  in >> cfg.obs_dim;
  expect_key("hidden");
  in >> cfg.hidden;
  expect_key("actions");
  in >> cfg.actions;
  expect_key("value_heads");
  in >> cfg.value_heads;
  if (!in || cfg.obs_dim < 1 || cfg.hidden < 1 || cfg.actions < 2 || cfg.value_heads < 1) {
    throw ValidationError("checkpoint " + path.string() + ": malformed header");
  }
  ckpt.net.cfg = cfg;
  ckpt.net.version = net_version;
  ckpt.net.w1 = read_tensor(in, "trunk_weights", cfg.hidden, cfg.obs_dim, path);
  ckpt.net.b1 = read_tensor(in, "trunk_bias", 1, cfg.hidden, path);
  ckpt.net.wp = read_tensor(in, "policy_weights", cfg.actions, cfg.hidden, path);
  ckpt.net.bp = read_tensor(in, "policy_bias", 1, cfg.actions, path);
  ckpt.net.wv = read_tensor(in, "value_weights", cfg.value_heads, cfg.hidden, path);
  ckpt.net.bv = read_tensor(in, "value_bias", 1, cfg.value_heads, path);

  expect_key("stats");
  std::size_t stat_count = 0;
  in >> stat_count;
  ckpt.stats.resize(stat_count);
  for (std::size_t i = 0; i < stat_count; ++i) {
    std::size_t idx = 0;
    NormStats s;
    if (!(in >> idx >> s.mu >> s.nu >> s.beta >> s.sigma_lo >> s.sigma_hi) || idx != i) {
      throw ValidationError("checkpoint " + path.string() + ": malformed stats entry");
    }
    ckpt.stats[i] = s;
  }
  expect_key("end");
  return ckpt;
}

}  // namespace mtac
