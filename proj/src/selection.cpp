#include "vsad/selection.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "vsad/io.hpp"
#include "vsad/rng.hpp"

namespace vsad {

namespace {

// Class indices ordered by descending response, ascending index on ties.
std::vector<int> rank_classes(const Eigen::RowVectorXd& response) {
    std::vector<int> order(static_cast<std::size_t>(response.size()));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (response[a] != response[b]) return response[a] > response[b];
        return a < b;
    });
    return order;
}

}  // namespace

void ResponseTable::check() const {
    const Eigen::Index v = global.size();
    if (per_image.cols() != v || per_category.cols() != v)
        throw Error(ErrorCode::InvariantViolation, "response table widths disagree");
    if (!per_image.allFinite() || !per_category.allFinite() || !global.allFinite())
        throw Error(ErrorCode::NonFinite, "response table has NaN/Inf");
    const Eigen::RowVectorXd from_categories = per_category.colwise().sum();
    const double scale = std::max(1.0, global.cwiseAbs().maxCoeff());
    if ((from_categories.transpose() - global).cwiseAbs().maxCoeff() > 1e-9 * scale)
        throw Error(ErrorCode::InvariantViolation,
                    "dataset responses do not match category column sums");
}

ResponseTable aggregate_responses(const ProbabilityMatrix& prob, const PatchManifest& manifest) {
    manifest.check();
    if (!manifest.all_labeled())
        throw Error(ErrorCode::MissingLabels, "response aggregation requires labeled images");
    if (manifest.coverage() != static_cast<std::size_t>(prob.n_patches()))
        throw Error(ErrorCode::MismatchedRows, "manifest coverage does not match probability rows");

    const Eigen::Index v = prob.n_classes();
    const auto n_images = static_cast<Eigen::Index>(manifest.n_images());
    const Eigen::Index n_categories = manifest.n_categories();

    ResponseTable table;
    table.per_image = Matrix::Zero(n_images, v);
    table.per_category = Matrix::Zero(n_categories, v);
    for (Eigen::Index i = 0; i < n_images; ++i) {
        const PatchRange& range = manifest.patch_ranges[static_cast<std::size_t>(i)];
        for (std::size_t t = range.start; t < range.end; ++t)
            table.per_image.row(i) += prob.data.row(static_cast<Eigen::Index>(t));
        table.per_category.row(manifest.labels[static_cast<std::size_t>(i)]) += table.per_image.row(i);
    }
    table.global = table.per_category.colwise().sum().transpose();
    table.check();
    return table;
}

SelectionResult select_codewords(const ResponseTable& table, int k) {
    table.check();
    const Eigen::Index v = table.n_classes();
    if (k < 1) throw Error(ErrorCode::InvalidConfig, "selection: K must be at least 1");
    if (2 * static_cast<Eigen::Index>(k) > v)
        throw Error(ErrorCode::KTooLarge,
                    "selection: need 2K <= V, got K=" + std::to_string(k) + " with V=" +
                        std::to_string(v));

    SelectionResult result;
    const std::vector<int> data_rank = rank_classes(table.global.transpose());
    result.o_data.assign(data_rank.begin(), data_rank.begin() + 2 * k);
    std::vector<char> in_data(static_cast<std::size_t>(v), 0);
    for (int c : result.o_data) in_data[static_cast<std::size_t>(c)] = 1;

    std::vector<std::vector<int>> category_rank;
    category_rank.reserve(static_cast<std::size_t>(table.n_categories()));
    for (Eigen::Index c = 0; c < table.n_categories(); ++c)
        category_rank.push_back(rank_classes(table.per_category.row(c)));

    std::vector<char> in_union(static_cast<std::size_t>(v), 0);
    std::vector<int> intersection;
    for (int t = 1; t <= static_cast<int>(v); ++t) {
        for (const auto& rank : category_rank)
            in_union[static_cast<std::size_t>(rank[static_cast<std::size_t>(t - 1)])] = 1;
        intersection.clear();
        for (Eigen::Index c = 0; c < v; ++c)
            if (in_union[static_cast<std::size_t>(c)] && in_data[static_cast<std::size_t>(c)])
                intersection.push_back(static_cast<int>(c));
        if (static_cast<int>(intersection.size()) >= k) {
            result.t_final = t;
            break;
        }
    }

    std::vector<char> in_intersection(static_cast<std::size_t>(v), 0);
    for (int c : intersection) in_intersection[static_cast<std::size_t>(c)] = 1;
    result.selected.reserve(static_cast<std::size_t>(k));
    for (int c : data_rank) {
        if (static_cast<int>(result.selected.size()) == k) break;
        if (in_intersection[static_cast<std::size_t>(c)]) result.selected.push_back(c);
    }
    std::sort(result.selected.begin(), result.selected.end());

    for (Eigen::Index c = 0; c < v; ++c)
        if (in_union[static_cast<std::size_t>(c)]) result.o_category.push_back(static_cast<int>(c));
    return result;
}

std::vector<int> random_selection(Eigen::Index n_classes, int k, std::uint64_t seed) {
    if (k < 1 || static_cast<Eigen::Index>(k) > n_classes)
        throw Error(ErrorCode::KTooLarge, "random selection: K out of range");
    Rng rng(seed);
    const std::vector<std::size_t> perm = rng.permutation(static_cast<std::size_t>(n_classes));
    std::vector<int> selected(perm.begin(), perm.begin() + k);
    std::sort(selected.begin(), selected.end());
    return selected;
}

void write_selection(const std::string& path, const std::vector<int>& selected) {
    std::ostringstream out;
    for (int c : selected) out << c << '\n';
    io::atomic_write(path, std::move(out).str());
}

std::vector<int> read_selection(const std::string& path) {
    std::istringstream in(io::read_file(path));
    std::vector<int> selected;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            std::size_t used = 0;
            const int value = std::stoi(line, &used);
            if (used != line.size()) throw std::invalid_argument("trailing characters");
            selected.push_back(value);
        } catch (const std::exception&) {
            throw Error(ErrorCode::ParseError,
                        path + ":" + std::to_string(line_no) + ": expected a class index");
        }
    }
    return selected;
}

}  // namespace vsad
