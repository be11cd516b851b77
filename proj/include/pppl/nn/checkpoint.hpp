#ifndef PPPL_NN_CHECKPOINT_HPP
#define PPPL_NN_CHECKPOINT_HPP

#include <iosfwd>
#include <string>

#include "pppl/nn/loss.hpp"
#include "pppl/nn/model.hpp"

namespace pppl::nn {

inline constexpr int kCheckpointFormat = 1;

struct Checkpoint {
    Model<float> model;
    LossKind loss = LossKind::mse;
};

// Layout:
//   pppl-checkpoint
//   format 1
//   dims <d0> <d1> ... <dL>
//   seed <u64>
//   loss mse|ce
//   end
// followed, per layer, by the row-major weight (out x in) and the bias as little-endian float32.
void write_checkpoint(std::ostream& out, const Model<float>& model, LossKind loss);
Checkpoint read_checkpoint(std::istream& in);

void save_checkpoint(const std::string& path, const Model<float>& model, LossKind loss);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace pppl::nn

#endif  // PPPL_NN_CHECKPOINT_HPP
