#include "pppl/nn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

namespace pppl::nn {

namespace {

constexpr const char* kMagic = "pppl-checkpoint";

void put_f32(std::ostream& out, float value) {
    std::uint32_t bits = std::bit_cast<std::uint32_t>(value);
    unsigned char bytes[4];
    for (int i = 0; i < 4; ++i) {
        bytes[i] = static_cast<unsigned char>((bits >> (8 * i)) & 0xFFu);
    }
    out.write(reinterpret_cast<const char*>(bytes), 4);
}

float get_f32(std::istream& in) {
    unsigned char bytes[4];
    if (!in.read(reinterpret_cast<char*>(bytes), 4)) {
        throw DataError("checkpoint truncated: parameter data shorter than the header declares");
    }
    std::uint32_t bits = 0;
    for (int i = 0; i < 4; ++i) {
        bits |= static_cast<std::uint32_t>(bytes[i]) << (8 * i);
    }
    return std::bit_cast<float>(bits);
}

std::string expect_line(std::istream& in, const std::string& key) {
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError("checkpoint header ended before '" + key + "'");
    }
    if (line.rfind(key, 0) != 0) {
        throw DataError("checkpoint header: expected '" + key + "', found '" + line + "'");
    }
    return line.size() > key.size() ? line.substr(key.size() + 1) : std::string{};
}

}  // namespace

void write_checkpoint(std::ostream& out, const Model<float>& model, LossKind loss) {
    out << kMagic << '\n' << "format " << kCheckpointFormat << '\n' << "dims";
    for (int d : model.layer_dims()) {
        out << ' ' << d;
    }
    out << '\n' << "seed " << model.seed() << '\n' << "loss " << to_string(loss) << '\n' << "end\n";
    for (const auto& layer : model.layers()) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
                put_f32(out, layer.weight(r, c));
            }
        }
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
            put_f32(out, layer.bias(i));
        }
    }
    if (!out) {
        throw DataError("failed writing checkpoint");
    }
}

Checkpoint read_checkpoint(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kMagic) {
        throw DataError("not a checkpoint file (bad magic line)");
    }
    const std::string format = expect_line(in, "format");
    if (format != std::to_string(kCheckpointFormat)) {
        throw DataError("unsupported checkpoint format '" + format + "'");
    }
    std::vector<int> dims;
    {
        std::istringstream ds(expect_line(in, "dims"));
        int d = 0;
        while (ds >> d) {
            dims.push_back(d);
        }
        if (!ds.eof()) {
            throw DataError("checkpoint header: malformed dims line");
        }
    }
    std::uint64_t seed = 0;
    {
        std::istringstream ss(expect_line(in, "seed"));
        if (!(ss >> seed)) {
            throw DataError("checkpoint header: malformed seed line");
        }
    }
    LossKind loss = LossKind::mse;
    try {
        loss = parse_loss_kind(expect_line(in, "loss"));
    } catch (const ConfigError& e) {
        throw DataError(std::string("checkpoint header: ") + e.what());
    }
    expect_line(in, "end");

    Checkpoint ckpt;
    try {
        ckpt.model = Model<float>(dims, seed);
    } catch (const ConfigError& e) {
        throw DataError(std::string("checkpoint header: ") + e.what());
    }
    ckpt.loss = loss;
    for (auto& layer : ckpt.model.layers()) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
            for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
                layer.weight(r, c) = get_f32(in);
            }
        }
        for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
            layer.bias(i) = get_f32(in);
        }
    }
    if (in.peek() != std::char_traits<char>::eof()) {
        throw DataError("checkpoint has trailing bytes beyond the declared shapes");
    }
    return ckpt;
}

void save_checkpoint(const std::string& path, const Model<float>& model, LossKind loss) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    write_checkpoint(out, model, loss);
}

Checkpoint load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw DataError("cannot open checkpoint '" + path + "'");
    }
    return read_checkpoint(in);
}

}  // namespace pppl::nn
