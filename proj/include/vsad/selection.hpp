#ifndef VSAD_SELECTION_HPP
#define VSAD_SELECTION_HPP

#include <string>
#include <vector>

#include "vsad/core.hpp"

namespace vsad {

// Object-class responses accumulated image -> category -> dataset.
struct ResponseTable {
    Matrix per_image;     // I x V
    Matrix per_category;  // C x V
    Vector global;        // V

    Eigen::Index n_images() const { return per_image.rows(); }
    Eigen::Index n_categories() const { return per_category.rows(); }
    Eigen::Index n_classes() const { return global.size(); }
    void check() const;
};

struct SelectionResult {
    std::vector<int> selected;    // K original class indices, ascending
    int t_final = 0;              // per-category depth that reached K
    std::vector<int> o_data;      // top-2K dataset classes, rank order
    std::vector<int> o_category;  // category union at t_final, ascending
};

// Sums patch responses per image, per category, and over the dataset.
// Every image must carry a label.
ResponseTable aggregate_responses(const ProbabilityMatrix& prob, const PatchManifest& manifest);

// Four-step selection: top-2K dataset classes, growing per-category top-T
// unions, their intersection, and truncation back to K by dataset response.
// Ties always break to the higher response first, then the lower class index.
SelectionResult select_codewords(const ResponseTable& table, int k);

// Seeded uniform draw of K distinct class indices, ascending (comparison
// baseline for the selection experiments).
std::vector<int> random_selection(Eigen::Index n_classes, int k, std::uint64_t seed);

// One class index per line.
void write_selection(const std::string& path, const std::vector<int>& selected);
std::vector<int> read_selection(const std::string& path);

}  // namespace vsad

#endif
