#ifndef VSAD_SRC_JSON_UTIL_HPP
#define VSAD_SRC_JSON_UTIL_HPP

// Internal JSON <-> Eigen conversion helpers shared by the model writers.

#include <json.hpp>

#include "vsad/core.hpp"

namespace vsad::detail {

inline nlohmann::json matrix_to_json(const Matrix& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols) {
    if (static_cast<Eigen::Index>(j.size()) != rows)
        throw Error(ErrorCode::ParseError, "matrix row count mismatch");
    Matrix m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const auto& row = j.at(static_cast<std::size_t>(i));
        if (static_cast<Eigen::Index>(row.size()) != cols)
            throw Error(ErrorCode::ParseError, "matrix column count mismatch");
        for (Eigen::Index k = 0; k < cols; ++k)
            m(i, k) = row.at(static_cast<std::size_t>(k)).get<double>();
    }
    return m;
}

inline Vector vector_from_json(const nlohmann::json& j, Eigen::Index size) {
    if (static_cast<Eigen::Index>(j.size()) != size)
        throw Error(ErrorCode::ParseError, "vector length mismatch");
    Vector v(size);
    for (Eigen::Index i = 0; i < size; ++i) v(i) = j.at(static_cast<std::size_t>(i)).get<double>();
    return v;
}

}  // namespace vsad::detail

#endif
