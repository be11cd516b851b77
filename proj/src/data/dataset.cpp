#include "pppl/data/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <string_view>
#include <vector>

#include "pppl/error.hpp"

namespace pppl::data {

namespace {

void check_labels(const Eigen::VectorXi& labels, int num_classes, Eigen::Index rows) {
    if (labels.size() != rows) {
        throw ShapeError("label count " + std::to_string(labels.size()) + " does not match " + std::to_string(rows) +
                         " feature rows");
    }
    for (Eigen::Index i = 0; i < labels.size(); ++i) {
        if (labels(i) < 0 || labels(i) >= num_classes) {
            throw DataError("label " + std::to_string(labels(i)) + " at row " + std::to_string(i) + " outside [0, " +
                            std::to_string(num_classes) + ")");
        }
    }
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_cells(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return cells;
}

std::string unquote(std::string_view s) {
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return std::string(s);
}

}  // namespace

void validate(const LabeledDataset& ds) {
    if (ds.size() == 0) {
        throw DataError("dataset '" + ds.provenance + "' is empty");
    }
    if (!ds.features.allFinite()) {
        throw DataError("dataset '" + ds.provenance + "' has non-finite features");
    }
    check_labels(ds.labels, ds.num_classes, ds.size());
}

void validate(const UnlabeledDataset& ds) {
    if (ds.size() == 0) {
        throw DataError("dataset '" + ds.provenance + "' is empty");
    }
    if (!ds.features.allFinite()) {
        throw DataError("dataset '" + ds.provenance + "' has non-finite features");
    }
    if (ds.hidden_labels) {
        check_labels(*ds.hidden_labels, ds.num_classes, ds.size());
    }
}

UnlabeledDataset hide_labels(const LabeledDataset& ds) {
    return UnlabeledDataset{ds.features, ds.labels, ds.num_classes, ds.provenance};
}

LabeledDataset reveal_labels(const UnlabeledDataset& ds) {
    if (!ds.hidden_labels) {
        throw ConfigError("dataset '" + ds.provenance + "' carries no hidden labels");
    }
    return LabeledDataset{ds.features, *ds.hidden_labels, ds.num_classes, ds.provenance};
}

std::pair<LabeledDataset, LabeledDataset> split(const LabeledDataset& ds, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0)) {
        throw ConfigError("split fraction must lie strictly between 0 and 1");
    }
    const Eigen::Index n = ds.size();
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    const auto first_size = static_cast<Eigen::Index>(std::llround(fraction * static_cast<double>(n)));
    std::vector<Eigen::Index> a(order.begin(), order.begin() + first_size);
    std::vector<Eigen::Index> b(order.begin() + first_size, order.end());
    auto take = [&](const std::vector<Eigen::Index>& idx, const char* tag) {
        return LabeledDataset{ds.features(idx, Eigen::all), ds.labels(idx), ds.num_classes,
                              ds.provenance + tag};
    };
    return {take(a, "/train"), take(b, "/eval")};
}

std::variant<LabeledDataset, UnlabeledDataset> load_feature_csv(const std::string& path,
                                                                 const std::optional<std::string>& label_column) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    std::string line;
    if (!std::getline(in, line)) {
        throw DataError(path + ": missing header row");
    }
    std::vector<std::string> header;
    for (auto cell : split_cells(line)) {
        header.push_back(unquote(cell));
    }
    int label_idx = -1;
    if (label_column) {
        const auto it = std::find(header.begin(), header.end(), *label_column);
        if (it == header.end()) {
            throw DataError(path + ": no column named '" + *label_column + "' in header");
        }
        label_idx = static_cast<int>(it - header.begin());
    }
    const int width = static_cast<int>(header.size()) - (label_idx >= 0 ? 1 : 0);
    if (width < 1) {
        throw DataError(path + ": no feature columns");
    }

    std::vector<float> values;
    std::vector<int> labels;
    int row = 0;
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        ++row;
        const auto where = [&]() { return path + ": row " + std::to_string(row) + " (line " + std::to_string(line_no) + ")"; };
        const auto cells = split_cells(line);
        if (cells.size() != header.size()) {
            throw DataError(where() + ": expected " + std::to_string(header.size()) + " cells, found " +
                            std::to_string(cells.size()));
        }
        for (int c = 0; c < static_cast<int>(cells.size()); ++c) {
            const std::string_view cell = cells[c];
            if (c == label_idx) {
                int label = 0;
                const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
                if (ec != std::errc{} || ptr != cell.data() + cell.size()) {
                    throw DataError(where() + ", column '" + header[c] + "': label '" + std::string(cell) +
                                    "' is not an integer");
                }
                if (label < 0) {
                    throw DataError(where() + ", column '" + header[c] + "': label " + std::to_string(label) +
                                    " out of range");
                }
                labels.push_back(label);
                continue;
            }
            double v = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc{} || ptr != cell.data() + cell.size() || !std::isfinite(v)) {
                throw DataError(where() + ", column '" + header[c] + "': non-numeric value '" + std::string(cell) + "'");
            }
            values.push_back(static_cast<float>(v));
        }
    }
    if (row == 0) {
        throw DataError(path + ": no data rows");
    }

    Eigen::MatrixXf features =
        Eigen::Map<Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(values.data(), row, width);
    if (label_idx < 0) {
        return UnlabeledDataset{std::move(features), std::nullopt, 0, path};
    }
    Eigen::VectorXi label_vec = Eigen::Map<Eigen::VectorXi>(labels.data(), row);
    const int num_classes = std::max(2, label_vec.maxCoeff() + 1);
    return LabeledDataset{std::move(features), std::move(label_vec), num_classes, path};
}

void write_feature_csv(const std::string& path, const Eigen::MatrixXf& features,
                       const std::optional<Eigen::VectorXi>& labels) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot open '" + path + "' for writing");
    }
    for (Eigen::Index c = 0; c < features.cols(); ++c) {
        out << (c ? "," : "") << 'x' << c;
    }
    if (labels) {
        out << ",label";
    }
    out << '\n';
    char buf[64];
    for (Eigen::Index r = 0; r < features.rows(); ++r) {
        for (Eigen::Index c = 0; c < features.cols(); ++c) {
            const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, features(r, c));
            out << (c ? "," : "") << std::string_view(buf, static_cast<std::size_t>(ptr - buf));
        }
        if (labels) {
            out << ',' << (*labels)(r);
        }
        out << '\n';
    }
}

}  // namespace pppl::data
