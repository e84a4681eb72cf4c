#include "appt/data_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

#include "appt/csv.hpp"
#include "appt/errors.hpp"

namespace appt::ingest {

namespace {

FeatureSpec numeric(std::string name, double lo, double hi) {
    return {std::move(name), FeatureKind::numeric, Interval{lo, hi}, {}, {}};
}

FeatureSpec yes_no(std::string name) {
    return {std::move(name), FeatureKind::binary, Interval{0, 1},
            {"no", "n", "0", "false"}, {"yes", "y", "1", "true"}};
}

std::optional<double> parse_number(std::string_view text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    if (first != last && *first == '+') ++first;
    const auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last || !std::isfinite(value)) return std::nullopt;
    return value;
}

}  // namespace

std::string_view to_string(FeatureKind kind) {
    switch (kind) {
        case FeatureKind::numeric: return "numeric";
        case FeatureKind::binary: return "binary";
        case FeatureKind::ordinal: return "ordinal";
    }
    return "unknown";
}

std::string fold_name(std::string_view name) {
    std::string out;
    for (unsigned char c : name) {
        if (std::isalnum(c)) out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

FeatureSchema FeatureSchema::patient_features() {
    FeatureSchema schema;
    auto& f = schema.features;
    f.push_back(numeric("Age", 30, 86));
    f.push_back(numeric("Weight", 48, 120));
    f.push_back(numeric("Length", 140, 188));
    f.push_back({"Sex", FeatureKind::binary, Interval{0, 1},
                 {"female", "f", "fmale", "0"}, {"male", "m", "1"}});
    for (const char* name : {"DM", "HTN", "Current smoker", "Ex-smoker", "FH", "CRF", "CVA",
                             "Airway disease", "Thyroid Disease", "CHF", "DLP"}) {
        f.push_back(yes_no(name));
    }
    f.push_back(numeric("BP", 90, 190));
    f.push_back(numeric("PR", 50, 110));
    for (const char* name : {"Edema", "Weak peripheral pulse", "Lung rales", "Systolic murmur",
                             "Diastolic murmur", "Typical Chest Pain", "Dyspnea"}) {
        f.push_back(yes_no(name));
    }
    f.push_back({"Function class", FeatureKind::ordinal, Interval{1, 4}, {}, {}});
    for (const char* name : {"Atypical", "Nonanginal CP", "Exertional CP", "Low Th Ang"}) {
        f.push_back(yes_no(name));
    }
    schema.aliases = {{"Nonanginal", "Nonanginal CP"},
                      {"Exertional Chest Pain", "Exertional CP"},
                      {"Low Threshold angina", "Low Th Ang"}};
    return schema;
}

FeatureSchema FeatureSchema::all_numeric(std::span<const std::string> names) {
    FeatureSchema schema;
    for (const auto& name : names) schema.features.push_back({name, FeatureKind::numeric, {}, {}, {}});
    return schema;
}

std::optional<std::size_t> FeatureSchema::index_of(std::string_view header) const {
    std::string key = fold_name(header);
    for (const auto& [alias, canonical] : aliases) {
        if (fold_name(alias) == key) {
            key = fold_name(canonical);
            break;
        }
    }
    for (std::size_t i = 0; i < features.size(); ++i) {
        if (fold_name(features[i].name) == key) return i;
    }
    return std::nullopt;
}

double encode_value(const FeatureSpec& spec, std::string_view text) {
    switch (spec.kind) {
        case FeatureKind::numeric: {
            if (auto v = parse_number(text)) return *v;
            break;
        }
        case FeatureKind::ordinal: {
            if (auto v = parse_number(text); v && *v == std::floor(*v)) return *v;
            break;
        }
        case FeatureKind::binary: {
            const std::string key = fold_name(text);
            if (!key.empty()) {
                if (std::find(spec.false_tokens.begin(), spec.false_tokens.end(), key) !=
                    spec.false_tokens.end())
                    return 0.0;
                if (std::find(spec.true_tokens.begin(), spec.true_tokens.end(), key) !=
                    spec.true_tokens.end())
                    return 1.0;
            }
            break;
        }
    }
    throw std::invalid_argument("'" + std::string(text) + "' is not a valid " +
                                std::string(to_string(spec.kind)) + " value for " + spec.name);
}

LoadResult parse_dataset(std::istream& in, const FeatureSchema& schema) {
    LoadResult result;
    std::string line;
    if (!csv::read_line(in, line, /*strip_bom=*/true)) {
        throw SchemaError(schema.features.empty() ? "<header>" : schema.features.front().name);
    }

    const auto header = csv::split_record(line);
    std::vector<std::optional<std::size_t>> column_of(schema.size());
    std::optional<std::size_t> id_column;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (fold_name(header[c]) == "id") {
            id_column = c;
            continue;
        }
        if (auto idx = schema.index_of(header[c]); idx && !column_of[*idx]) column_of[*idx] = c;
    }
    for (std::size_t i = 0; i < schema.size(); ++i) {
        if (!column_of[i]) throw SchemaError(schema.features[i].name);
    }

    std::size_t row = 0;
    while (csv::read_line(in, line)) {
        ++row;
        const auto cells = csv::split_record(line);
        PatientRecord record;
        record.id = id_column && *id_column < cells.size() ? cells[*id_column] : std::to_string(row);
        record.values.reserve(schema.size());
        for (std::size_t i = 0; i < schema.size(); ++i) {
            const auto& spec = schema.features[i];
            const std::size_t c = *column_of[i];
            const std::string cell = c < cells.size() ? cells[c] : std::string{};
            double value = 0.0;
            try {
                value = encode_value(spec, cell);
            } catch (const std::invalid_argument&) {
                throw RowError(row, spec.name, cell);
            }
            if (spec.declared_range && spec.kind != FeatureKind::binary &&
                !spec.declared_range->contains(value)) {
                std::ostringstream msg;
                msg << "row " << row << ": " << spec.name << " = " << cell << " outside declared range ["
                    << spec.declared_range->lo << ", " << spec.declared_range->hi << "]";
                result.warnings.push_back(msg.str());
            }
            record.values.push_back(cell);
        }
        result.records.push_back(std::move(record));
    }
    return result;
}

LoadResult load_dataset(const std::filesystem::path& path, const FeatureSchema& schema) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open dataset '" + path.string() + "'");
    return parse_dataset(in, schema);
}

FeatureMatrix::FeatureMatrix(Eigen::MatrixXd data, std::vector<std::string> ids,
                             std::vector<std::size_t> active_features, std::vector<std::string> names)
    : data_(std::move(data)), ids_(std::move(ids)), active_(std::move(active_features)),
      names_(std::move(names)) {
    if (static_cast<std::size_t>(data_.rows()) != ids_.size() ||
        static_cast<std::size_t>(data_.cols()) != active_.size() || active_.size() != names_.size()) {
        throw std::invalid_argument("FeatureMatrix: inconsistent dimensions");
    }
}

FeatureMatrix FeatureMatrix::select_columns(std::span<const std::size_t> columns) const {
    Eigen::MatrixXd sub(data_.rows(), static_cast<Eigen::Index>(columns.size()));
    std::vector<std::size_t> active;
    std::vector<std::string> names;
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] >= active_.size()) throw std::out_of_range("select_columns: column out of range");
        sub.col(static_cast<Eigen::Index>(j)) = data_.col(static_cast<Eigen::Index>(columns[j]));
        active.push_back(active_[columns[j]]);
        names.push_back(names_[columns[j]]);
    }
    return FeatureMatrix(std::move(sub), ids_, std::move(active), std::move(names));
}

Eigen::MatrixXd min_max_normalize(Eigen::MatrixXd data) {
    for (Eigen::Index j = 0; j < data.cols(); ++j) {
        auto col = data.col(j);
        if (col.size() == 0) continue;
        const double lo = col.minCoeff();
        const double hi = col.maxCoeff();
        if (hi > lo) {
            col = (col.array() - lo) / (hi - lo);
        } else {
            col.setZero();
        }
    }
    return data;
}

FeatureMatrix encode_normalize(std::span<const PatientRecord> records, const FeatureSchema& schema) {
    if (records.empty()) throw std::invalid_argument("encode_normalize: no records");
    const auto n = static_cast<Eigen::Index>(records.size());
    const auto q = static_cast<Eigen::Index>(schema.size());
    Eigen::MatrixXd raw(n, q);
    std::vector<std::string> ids;
    ids.reserve(records.size());
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& rec = records[static_cast<std::size_t>(r)];
        if (rec.values.size() != schema.size()) {
            throw std::invalid_argument("encode_normalize: record '" + rec.id + "' has wrong arity");
        }
        for (Eigen::Index c = 0; c < q; ++c) {
            raw(r, c) = encode_value(schema.features[static_cast<std::size_t>(c)],
                                     rec.values[static_cast<std::size_t>(c)]);
        }
        ids.push_back(rec.id);
    }
    std::vector<std::size_t> active(schema.size());
    std::vector<std::string> names;
    for (std::size_t i = 0; i < schema.size(); ++i) {
        active[i] = i;
        names.push_back(schema.features[i].name);
    }
    return FeatureMatrix(min_max_normalize(std::move(raw)), std::move(ids), std::move(active),
                         std::move(names));
}

void write_matrix_csv(std::ostream& out, const FeatureMatrix& matrix) {
    out << "id";
    for (const auto& name : matrix.names()) out << ',' << csv::escape(name);
    out << '\n';
    const auto precision = out.precision(17);
    for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
        out << csv::escape(matrix.ids()[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < matrix.cols(); ++c) out << ',' << matrix.data()(r, c);
        out << '\n';
    }
    out.precision(precision);
}

}  // namespace appt::ingest
