#include "stochprox/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "stochprox/models/logistic_re.hpp"

namespace stochprox {

namespace {

constexpr char kMagic[4] = {'S', 'P', 'X', 'B'};
constexpr std::uint32_t kVersion = 1;

template <class T>
void write_pod(std::ostream& os, const T& v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T read_pod(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw std::runtime_error("binary container: truncated file");
  return v;
}

}  // namespace

void write_binary_container(const std::string& path, const std::vector<NamedArray>& arrays) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("write_binary_container: cannot open " + path);
  os.write(kMagic, 4);
  write_pod(os, kVersion);
  write_pod(os, static_cast<std::uint32_t>(arrays.size()));
  for (const auto& a : arrays) {
    write_pod(os, static_cast<std::uint32_t>(a.name.size()));
    os.write(a.name.data(), static_cast<std::streamsize>(a.name.size()));
    write_pod(os, static_cast<std::uint64_t>(a.values.rows()));
    write_pod(os, static_cast<std::uint64_t>(a.values.cols()));
    os.write(reinterpret_cast<const char*>(a.values.data()),
             static_cast<std::streamsize>(sizeof(double) * a.values.size()));
  }
  if (!os) throw std::runtime_error("write_binary_container: write failed for " + path);
}

std::vector<NamedArray> read_binary_container(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("read_binary_container: cannot open " + path);
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0) {
    throw std::runtime_error("read_binary_container: bad magic in " + path);
  }
  const auto version = read_pod<std::uint32_t>(is);
  if (version != kVersion) {
    throw std::runtime_error("read_binary_container: unsupported version " +
                             std::to_string(version));
  }
  const auto count = read_pod<std::uint32_t>(is);
  std::vector<NamedArray> arrays(count);
  for (auto& a : arrays) {
    const auto name_len = read_pod<std::uint32_t>(is);
    a.name.resize(name_len);
    is.read(a.name.data(), name_len);
    const auto rows = read_pod<std::uint64_t>(is);
    const auto cols = read_pod<std::uint64_t>(is);
    a.values.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    is.read(reinterpret_cast<char*>(a.values.data()),
            static_cast<std::streamsize>(sizeof(double) * rows * cols));
    if (!is) throw std::runtime_error("read_binary_container: truncated array in " + path);
  }
  return arrays;
}

Eigen::MatrixXd csv_read_matrix(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("csv_read_matrix: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      row.push_back(std::stod(cell));
    }
    if (!rows.empty() && rows.front().size() != row.size()) {
      throw std::runtime_error("csv_read_matrix: ragged rows in " + path);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return Eigen::MatrixXd(0, 0);
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()),
                    static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
    }
  }
  return m;
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("write_json_file: cannot open " + path);
  os << j.dump(2) << "\n";
  if (!os) throw std::runtime_error("write_json_file: write failed for " + path);
}

nlohmann::json read_json_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("read_json_file: cannot open " + path);
  nlohmann::json j;
  is >> j;
  return j;
}

void save_logistic_dataset(const std::string& base_path, const LogisticREModel& model,
                           const SyntheticSpec& spec) {
  model.validate();
  Eigen::MatrixXd y(model.n(), 1);
  for (int i = 0; i < model.n(); ++i) y(i, 0) = model.Y[i];
  write_binary_container(base_path + ".bin", {{"X", model.X}, {"Z", model.Z}, {"Y", y}});
  nlohmann::json sidecar;
  sidecar["format"] = "stochprox-dataset";
  sidecar["dims"] = {{"N", model.n()}, {"p", model.p()}, {"q", model.q()}};
  sidecar["seed"] = spec.seed;
  sidecar["spec"] = {{"ar_rho", spec.ar_rho}, {"sparsity", spec.sparsity},
                     {"beta_lo", spec.beta_lo}, {"beta_hi", spec.beta_hi},
                     {"sigma2", spec.sigma2},   {"lambda", spec.lambda},
                     {"alpha", spec.alpha}};
  write_json_file(base_path + ".json", sidecar);
}

LogisticREModel load_logistic_dataset(const std::string& base_path) {
  const auto arrays = read_binary_container(base_path + ".bin");
  LogisticREModel model;
  for (const auto& a : arrays) {
    if (a.name == "X") {
      model.X = a.values;
    } else if (a.name == "Z") {
      model.Z = a.values;
    } else if (a.name == "Y") {
      model.Y.resize(a.values.rows());
      for (Eigen::Index i = 0; i < a.values.rows(); ++i) {
        model.Y[i] = static_cast<int>(a.values(i, 0));
      }
    }
  }
  model.validate();
  return model;
}

std::string fnv1a_hex(const std::string& data) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

}  // namespace stochprox
