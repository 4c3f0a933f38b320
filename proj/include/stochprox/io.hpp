#pragma once

#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "stochprox/types.hpp"

namespace stochprox {

/// Named dense array inside the binary dataset container. Vectors are stored
/// as single-column matrices.
struct NamedArray {
  std::string name;
  Eigen::MatrixXd values;
};

/// Binary container layout (little-endian):
///   magic "SPXB", uint32 version (1), uint32 array count, then per array:
///   uint32 name length, name bytes, uint64 rows, uint64 cols,
///   rows*cols float64 values in column-major order.
void write_binary_container(const std::string& path, const std::vector<NamedArray>& arrays);
std::vector<NamedArray> read_binary_container(const std::string& path);

/// Headerless comma-separated numeric matrix (external data import).
Eigen::MatrixXd csv_read_matrix(const std::string& path);

struct LogisticREModel;
struct SyntheticSpec;

/// Writes <base>.bin (arrays X, Z, Y) plus the <base>.json sidecar carrying
/// dimensions, seed and the generating design.
void save_logistic_dataset(const std::string& base_path, const LogisticREModel& model,
                           const SyntheticSpec& spec);
LogisticREModel load_logistic_dataset(const std::string& base_path);

void write_json_file(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json_file(const std::string& path);

/// FNV-1a hash of a string, used to fingerprint canonical config dumps.
std::string fnv1a_hex(const std::string& data);

}  // namespace stochprox
