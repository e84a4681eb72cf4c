#pragma once

// Patient dataset ingestion: CSV parsing against the 29-feature schema,
// binary/ordinal encoding and per-column min-max normalization.

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace appt::ingest {

enum class FeatureKind { numeric, binary, ordinal };

std::string_view to_string(FeatureKind kind);

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool contains(double v) const { return v >= lo && v <= hi; }
};

struct FeatureSpec {
    std::string name;
    FeatureKind kind = FeatureKind::numeric;
    std::optional<Interval> declared_range;
    // Binary features only: accepted spellings (folded) for 0 and for 1.
    std::vector<std::string> false_tokens;
    std::vector<std::string> true_tokens;
};

struct FeatureSchema {
    std::vector<FeatureSpec> features;
    // Header spelling -> canonical feature name. Keys are matched after folding
    // (case and punctuation are ignored).
    std::map<std::string, std::string> aliases;

    // The 29 patient features: 5 numeric, 23 binary (Sex included), and
    // Function class as ordinal 1..4.
    static FeatureSchema patient_features();

    // Every column numeric with no declared range. Used to re-ingest an
    // already normalized matrix.
    static FeatureSchema all_numeric(std::span<const std::string> names);

    std::size_t size() const { return features.size(); }

    // Resolves a header cell to a schema index (aliases applied).
    std::optional<std::size_t> index_of(std::string_view header) const;
};

// Lower-cases and drops everything but letters and digits.
std::string fold_name(std::string_view name);

struct PatientRecord {
    std::string id;
    // Raw cell text in schema order; validated at load time.
    std::vector<std::string> values;
};

// Parses one cell under its feature kind. Throws std::invalid_argument when
// the text is not acceptable for that kind.
double encode_value(const FeatureSpec& spec, std::string_view text);

struct LoadResult {
    std::vector<PatientRecord> records;
    // Values outside a declared range, one message per (row, column).
    std::vector<std::string> warnings;
};

// Reads the dataset. An optional "id" column names the records; otherwise
// the 1-based data row number is used. Columns not in the schema are ignored.
// Throws IoError, SchemaError (missing column) or RowError (bad cell).
LoadResult load_dataset(const std::filesystem::path& path, const FeatureSchema& schema);
LoadResult parse_dataset(std::istream& in, const FeatureSchema& schema);

class FeatureMatrix {
public:
    FeatureMatrix() = default;
    FeatureMatrix(Eigen::MatrixXd data, std::vector<std::string> ids,
                  std::vector<std::size_t> active_features, std::vector<std::string> names);

    const Eigen::MatrixXd& data() const { return data_; }
    const std::vector<std::string>& ids() const { return ids_; }
    // Schema indices of the columns, in column order.
    const std::vector<std::size_t>& active_features() const { return active_; }
    const std::vector<std::string>& names() const { return names_; }

    Eigen::Index rows() const { return data_.rows(); }
    Eigen::Index cols() const { return data_.cols(); }

    // Keeps the given column positions (not schema indices), in that order.
    FeatureMatrix select_columns(std::span<const std::size_t> columns) const;

private:
    Eigen::MatrixXd data_;
    std::vector<std::string> ids_;
    std::vector<std::size_t> active_;
    std::vector<std::string> names_;
};

// Column-wise min-max scaling to [0,1]; constant columns become zero.
Eigen::MatrixXd min_max_normalize(Eigen::MatrixXd data);

// Encodes every record and normalizes. Requires a nonempty record list.
FeatureMatrix encode_normalize(std::span<const PatientRecord> records, const FeatureSchema& schema);

// Audit export: header "id,<feature names>", one row per record.
void write_matrix_csv(std::ostream& out, const FeatureMatrix& matrix);

}  // namespace appt::ingest
