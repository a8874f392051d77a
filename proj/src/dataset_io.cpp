#include "aggcorr/dataset_io.hpp"

#include <fmt/format.h>

#include <boost/algorithm/string.hpp>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace aggcorr {

namespace {

std::string join_ints(const int* v, int n, char sep) {
  std::string out;
  for (int c = 0; c < n; ++c) out += (c ? std::string(1, sep) : "") + std::to_string(v[c]);
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& what) {
  throw std::runtime_error(fmt::format("dataset line {}: {}", line, what));
}

double to_double(std::size_t line, const std::string& s) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) fail(line, "bad number '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    fail(line, "bad number '" + s + "'");
  }
}

long long to_int(std::size_t line, const std::string& s) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(s, &used);
    if (used != s.size()) fail(line, "bad integer '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    fail(line, "bad integer '" + s + "'");
  }
}

std::vector<std::string> split(const std::string& s, const char* seps) {
  std::vector<std::string> out;
  boost::split(out, s, boost::is_any_of(seps));
  return out;
}

}  // namespace

void write_dataset(std::ostream& out, const Dataset& data) {
  const auto& p = data.params;
  const int dim = p.dim();
  out << "# aggcorr-dataset 1\n";
  out << "# dim " << dim << "\n";
  out << "# T " << data.T << "\n";
  out << "# seed " << data.seed << "\n";
  for (const auto& r : p.regions) {
    out << fmt::format("# region {} {} {} {:.17g}\n", r.id, join_ints(r.box.origin.coords.data(), dim, ','),
                       join_ints(r.box.shape.data(), dim, ','), r.sigma);
  }
  for (Eigen::Index a = 0; a < p.inter_corr.rows(); ++a) {
    for (Eigen::Index b = a + 1; b < p.inter_corr.cols(); ++b) {
      if (p.inter_corr(a, b) != 0.0) out << fmt::format("# inter_corr {} {} {:.17g}\n", a, b, p.inter_corr(a, b));
    }
  }
  out << fmt::format("# intra {:.17g} {:.17g}\n", p.intra.k_max(), p.intra.r_min());
  std::string eta;
  for (double w : p.noise_corr.weights()) eta += (eta.empty() ? "" : ",") + fmt::format("{:.17g}", w);
  out << fmt::format("# noise {:.17g} {:.17g} {}\n", p.sigma_eps, p.sigma_e, eta);
  out << "# psd_repair " << (p.psd_repair == PsdRepair::project ? "project" : "none") << "\n";

  out << "voxel_id,region_id,coords";
  for (std::size_t t = 1; t <= data.T; ++t) out << ",y_" << t;
  out << "\n";
  std::size_t col = 0;
  std::string row;
  for (const auto& r : p.regions) {
    for (std::size_t k = 0; k < r.voxel_count(); ++k, ++col) {
      const auto v = r.voxel_at(k);
      row = fmt::format("{},{},{}", col, r.id, join_ints(v.coords.data(), dim, ';'));
      for (std::size_t t = 0; t < data.T; ++t) {
        row += fmt::format(",{:.17g}", data.series(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(col)));
      }
      row += '\n';
      out << row;
    }
  }
  if (!out) throw std::runtime_error("write_dataset: stream error");
}

void write_dataset(const std::filesystem::path& path, const Dataset& data) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  write_dataset(f, data);
}

Dataset read_dataset(std::istream& in) {
  Dataset data;
  ModelParams& p = data.params;
  std::string line;
  std::size_t lineno = 0;
  int dim = -1;
  bool have_T = false, have_intra = false, have_noise = false;
  std::vector<std::tuple<int, int, double>> corr;

  const auto next = [&]() -> bool {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next() || line != "# aggcorr-dataset 1") fail(lineno, "missing '# aggcorr-dataset 1' header");
  while (true) {
    if (!next()) fail(lineno, "missing column header row");
    if (line.rfind("# ", 0) != 0) break;
    std::istringstream ls(line.substr(2));
    std::string key;
    ls >> key;
    std::vector<std::string> f;
    for (std::string tok; ls >> tok;) f.push_back(tok);
    const auto need = [&](std::size_t n) {
      if (f.size() != n) fail(lineno, fmt::format("'{}' expects {} fields", key, n));
    };
    if (key == "dim") {
      need(1);
      dim = static_cast<int>(to_int(lineno, f[0]));
      if (dim < 1 || dim > kMaxDim) fail(lineno, "dim must be 1..3");
    } else if (key == "T") {
      need(1);
      const auto T = to_int(lineno, f[0]);
      if (T < 2) fail(lineno, "T must be >= 2");
      data.T = static_cast<std::size_t>(T);
      have_T = true;
    } else if (key == "seed") {
      need(1);
      try {
        data.seed = std::stoull(f[0]);
      } catch (const std::logic_error&) {
        fail(lineno, "bad seed");
      }
    } else if (key == "region") {
      need(4);
      if (dim < 0) fail(lineno, "'region' before 'dim'");
      const auto origin = split(f[1], ",");
      const auto shape = split(f[2], ",");
      if (static_cast<int>(origin.size()) != dim || static_cast<int>(shape.size()) != dim) {
        fail(lineno, "region origin/shape do not match dim");
      }
      RegionSpec r;
      r.id = static_cast<int>(to_int(lineno, f[0]));
      if (r.id != static_cast<int>(p.regions.size())) fail(lineno, "region ids must be 0,1,2,... in order");
      r.box.origin.dim = dim;
      for (int c = 0; c < dim; ++c) {
        r.box.origin[c] = static_cast<int>(to_int(lineno, origin[static_cast<std::size_t>(c)]));
        r.box.shape[static_cast<std::size_t>(c)] = static_cast<int>(to_int(lineno, shape[static_cast<std::size_t>(c)]));
      }
      r.sigma = to_double(lineno, f[3]);
      try {
        validate(r);
      } catch (const std::exception& e) {
        fail(lineno, e.what());
      }
      p.regions.push_back(r);
    } else if (key == "inter_corr") {
      need(3);
      corr.emplace_back(static_cast<int>(to_int(lineno, f[0])), static_cast<int>(to_int(lineno, f[1])),
                        to_double(lineno, f[2]));
    } else if (key == "intra") {
      need(2);
      try {
        p.intra = CorrelationFunction::intra(to_double(lineno, f[0]), to_double(lineno, f[1]));
      } catch (const std::invalid_argument& e) {
        fail(lineno, e.what());
      }
      have_intra = true;
    } else if (key == "noise") {
      need(3);
      p.sigma_eps = to_double(lineno, f[0]);
      p.sigma_e = to_double(lineno, f[1]);
      std::vector<double> eta;
      for (const auto& w : split(f[2], ",")) eta.push_back(to_double(lineno, w));
      try {
        p.noise_corr = CorrelationFunction::noise(eta);
      } catch (const std::invalid_argument& e) {
        fail(lineno, e.what());
      }
      have_noise = true;
    } else if (key == "psd_repair") {
      need(1);
      if (f[0] == "project") {
        p.psd_repair = PsdRepair::project;
      } else if (f[0] == "none") {
        p.psd_repair = PsdRepair::none;
      } else {
        fail(lineno, "psd_repair must be none or project");
      }
    } else {
      fail(lineno, "unknown header key '" + key + "'");
    }
  }
  if (dim < 0 || !have_T || !have_intra || !have_noise || p.regions.empty()) {
    fail(lineno, "header is missing one of dim, T, region, intra, noise");
  }

  const auto J = static_cast<Eigen::Index>(p.regions.size());
  p.inter_corr = Eigen::MatrixXd::Identity(J, J);
  for (const auto& [a, b, r] : corr) {
    if (a < 0 || b < 0 || a >= J || b >= J || a >= b) fail(lineno, "inter_corr indices out of range");
    p.inter_corr(a, b) = p.inter_corr(b, a) = r;
  }
  try {
    validate(p);
  } catch (const std::exception& e) {
    fail(lineno, e.what());
  }

  const auto header = split(line, ",");
  if (header.size() != data.T + 3 || header[0] != "voxel_id" || header[1] != "region_id" || header[2] != "coords") {
    fail(lineno, "column header must be voxel_id,region_id,coords,y_1..y_T");
  }

  const std::size_t N = p.voxel_count();
  data.series.resize(static_cast<Eigen::Index>(data.T), static_cast<Eigen::Index>(N));
  std::size_t col = 0;
  for (const auto& r : p.regions) {
    for (std::size_t k = 0; k < r.voxel_count(); ++k, ++col) {
      if (!next()) fail(lineno, fmt::format("expected {} voxel rows, found {}", N, col));
      const auto cells = split(line, ",");
      if (cells.size() != data.T + 3) fail(lineno, fmt::format("expected {} columns", data.T + 3));
      if (to_int(lineno, cells[0]) != static_cast<long long>(col)) fail(lineno, "voxel_id out of order");
      if (to_int(lineno, cells[1]) != r.id) fail(lineno, "region_id does not match layout");
      const auto coords = split(cells[2], ";");
      const auto expect = r.voxel_at(k);
      if (static_cast<int>(coords.size()) != dim) fail(lineno, "coords do not match dim");
      for (int c = 0; c < dim; ++c) {
        if (to_int(lineno, coords[static_cast<std::size_t>(c)]) != expect[c]) fail(lineno, "coords do not match layout");
      }
      for (std::size_t t = 0; t < data.T; ++t) {
        data.series(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(col)) = to_double(lineno, cells[t + 3]);
      }
    }
  }
  while (next()) {
    if (!boost::trim_copy(line).empty()) fail(lineno, "unexpected trailing row");
  }
  return data;
}

Dataset read_dataset(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string());
  return read_dataset(f);
}

}  // namespace aggcorr
