#pragma once

#include <cstdint>
#include <string>
#include <vector>
#include <Eigen/Dense>

namespace ofm {

/* Binary container for named double tensors plus run context.
 *
 * Layout:  "OFM1" | uint32 version | uint64 header length | header JSON |
 *          payload (tensors back to back, column-major float64, little
 *          endian, in manifest order).
 * The header carries the config echo, the tail of the loss history, and a
 * tensor manifest of {name, shape, dtype, offset}; offsets are byte positions
 * into the payload and must be monotone and in bounds.  Loading reproduces
 * every tensor bit-exactly. */
struct NamedTensor {
  std::string name;
  Eigen::MatrixXd data;
};

struct Checkpoint {
  std::uint32_t version = 1;
  std::string config_echo;        // serialized RunConfig text
  std::vector<double> loss_tail;  // most recent training losses
  std::vector<NamedTensor> tensors;

  const Eigen::MatrixXd& tensor(const std::string& name) const;
  bool has(const std::string& name) const;
};

void save_checkpoint(const std::string& path, const Checkpoint& ck);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace ofm
