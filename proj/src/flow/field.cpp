#include "ofm/flow/field.hpp"

#include <vector>

namespace ofm {

namespace {

/* Thread-local free list; pooled tapes keep their node storage. */
thread_local std::vector<std::unique_ptr<Tape>> tape_pool;

std::unique_ptr<Tape> pool_acquire() {
  if (tape_pool.empty()) return std::make_unique<Tape>();
  std::unique_ptr<Tape> t = std::move(tape_pool.back());
  tape_pool.pop_back();
  return t;
}

void pool_release(std::unique_ptr<Tape> t) { tape_pool.push_back(std::move(t)); }

class FnoFieldTape final : public FieldTape {
 public:
  FnoFieldTape(const OperatorParams& p, double t, const Eigen::MatrixXd& u, const GridSpec& grid)
      : tape_(pool_acquire()) {
    tape_->reset();
    in_ = tape_->input(u);
    out_ = operator_record(*tape_, p, t, in_, grid);
  }
  ~FnoFieldTape() override { pool_release(std::move(tape_)); }

  const Eigen::MatrixXd& value() const override { return tape_->value(out_); }

  Eigen::MatrixXd vjp(const Eigen::MatrixXd& cotangent) override {
    tape_->backward(out_, cotangent, {}, /*want_param_grads=*/false);
    return tape_->input_grad(in_);
  }

 private:
  std::unique_ptr<Tape> tape_;
  int in_ = -1, out_ = -1;
};

}  // namespace

std::unique_ptr<FieldTape> FnoField::record(double t, const Eigen::MatrixXd& u,
                                            const GridSpec& grid) const {
  return std::make_unique<FnoFieldTape>(*params_, t, u, grid);
}

}  // namespace ofm
