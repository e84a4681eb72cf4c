#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "appt/csv.hpp"
#include "appt/data_ingest.hpp"
#include "appt/errors.hpp"
#include "fixtures.hpp"

using namespace appt;
using namespace appt::ingest;

namespace {

std::string header_line() {
    std::string s;
    for (const auto& h : fixture::header()) s += (s.empty() ? "" : ",") + h;
    return s + "\n";
}

// One row: numeric columns from `nums` (Age, Weight, Length, BP, PR), all
// binaries "No", Sex and Function class given.
std::string row(double age, double weight, double length, const std::string& sex, double bp, double pr, int fc,
                const std::string& dm = "No") {
    std::ostringstream s;
    s << age << ',' << weight << ',' << length << ',' << sex << ',' << dm;
    for (int k = 0; k < 10; ++k) s << ",No";
    s << ',' << bp << ',' << pr;
    for (int k = 0; k < 7; ++k) s << ",No";
    s << ',' << fc;
    for (int k = 0; k < 4; ++k) s << ",Yes";
    return s.str() + "\n";
}

}  // namespace

TEST_CASE("csv records handle quotes and blank lines") {
    CHECK(csv::split_record("a, \"b,c\" ,d") == std::vector<std::string>{"a", "b,c", "d"});
    CHECK(csv::split_record("\"say \"\"hi\"\"\",x") == std::vector<std::string>{"say \"hi\"", "x"});
    std::istringstream in("\xEF\xBB\xBF" "a,b\r\n\n\nc,d\n");
    std::string line;
    REQUIRE(csv::read_line(in, line, true));
    CHECK(line == "a,b");
    REQUIRE(csv::read_line(in, line));
    CHECK(line == "c,d");
    CHECK_FALSE(csv::read_line(in, line));
}

TEST_CASE("schema has the 29 features in table order") {
    const auto s = FeatureSchema::patient_features();
    REQUIRE(s.size() == 29);
    CHECK(s.features.front().name == "Age");
    CHECK(s.features[3].name == "Sex");
    CHECK(s.features[3].kind == FeatureKind::binary);
    CHECK(s.features[24].name == "Function class");
    CHECK(s.features[24].kind == FeatureKind::ordinal);
    CHECK(s.features.back().name == "Low Th Ang");
    int numeric = 0, binary = 0;
    for (const auto& f : s.features) {
        numeric += f.kind == FeatureKind::numeric;
        binary += f.kind == FeatureKind::binary;
    }
    CHECK(numeric == 5);
    CHECK(binary == 23);
    CHECK(s.features[0].declared_range->lo == 30);
    CHECK(s.features[0].declared_range->hi == 86);
    CHECK(s.features[15].name == "BP");
    CHECK(s.features[15].declared_range->lo == 90);
    CHECK(s.features[15].declared_range->hi == 190);
    CHECK(s.index_of("nonanginal").value() == 26);
    CHECK(s.index_of("CURRENT SMOKER").value() == 6);
    CHECK_FALSE(s.index_of("Cholesterol").has_value());
}

TEST_CASE("encode_value accepts the listed spellings only") {
    const auto s = FeatureSchema::patient_features();
    const auto& dm = s.features[4];
    CHECK(encode_value(dm, "Yes") == 1.0);
    CHECK(encode_value(dm, "no") == 0.0);
    CHECK(encode_value(dm, "Y") == 1.0);
    CHECK_THROWS_AS(encode_value(dm, "maybe"), std::invalid_argument);
    CHECK(encode_value(s.features[3], "Male") == 1.0);
    CHECK(encode_value(s.features[3], "Fmale") == 0.0);
    CHECK(encode_value(s.features[24], "3") == 3.0);
    CHECK_THROWS(encode_value(s.features[24], "2.5"));
    CHECK_THROWS(encode_value(s.features[0], "abc"));
    CHECK_THROWS(encode_value(s.features[0], ""));
}

TEST_CASE("303 synthetic rows load as 303 records") {
    const auto path = std::filesystem::temp_directory_path() / "appt_ingest_303.csv";
    fixture::write_patients(path, 303, 7);
    const auto loaded = load_dataset(path, FeatureSchema::patient_features());
    CHECK(loaded.records.size() == 303);
    CHECK(loaded.records.front().id == "1");
    CHECK(loaded.records.back().values.size() == 29);
    std::filesystem::remove(path);
}

TEST_CASE("header only gives zero records") {
    std::istringstream in(header_line());
    CHECK(parse_dataset(in, FeatureSchema::patient_features()).records.empty());
}

TEST_CASE("bad cell is a row error naming the column") {
    std::istringstream in(header_line() + row(40, 70, 170, "Male", 120, 70, 1) + row(40, 70, 170, "Male", 120, 70, 1, "maybe"));
    try {
        parse_dataset(in, FeatureSchema::patient_features());
        FAIL("expected RowError");
    } catch (const RowError& e) {
        CHECK(e.row() == 2);
        CHECK(e.column() == "DM");
    }
}

TEST_CASE("missing column is a schema error naming it") {
    std::string h = header_line();
    h.replace(h.find(",PR,"), 4, ",");
    std::istringstream in(h);
    try {
        parse_dataset(in, FeatureSchema::patient_features());
        FAIL("expected SchemaError");
    } catch (const SchemaError& e) {
        CHECK(e.column() == "PR");
    }
}

TEST_CASE("missing file is an I/O error") {
    CHECK_THROWS_AS(load_dataset("/nonexistent/patients.csv", FeatureSchema::patient_features()), IoError);
}

TEST_CASE("out-of-range values warn but load") {
    std::istringstream in(header_line() + row(95, 70, 170, "Male", 120, 70, 1));
    const auto r = parse_dataset(in, FeatureSchema::patient_features());
    CHECK(r.records.size() == 1);
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("Age") != std::string::npos);
}

TEST_CASE("id column names records and extra columns are ignored") {
    std::string h = "id,Notes," + header_line();
    std::istringstream in(h + "p-17,hello," + row(40, 70, 170, "Male", 120, 70, 1));
    const auto r = parse_dataset(in, FeatureSchema::patient_features());
    REQUIRE(r.records.size() == 1);
    CHECK(r.records[0].id == "p-17");
}

TEST_CASE("single record normalizes to zeros") {
    std::istringstream in(header_line() + row(40, 70, 170, "Male", 120, 70, 2));
    const auto schema = FeatureSchema::patient_features();
    const auto m = encode_normalize(parse_dataset(in, schema).records, schema);
    CHECK(m.rows() == 1);
    CHECK(m.data().cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("four records match hand normalization") {
    const auto schema = FeatureSchema::patient_features();
    std::istringstream in(header_line() + row(30, 50, 150, "Male", 100, 60, 1) + row(86, 100, 160, "Fmale", 190, 60, 4, "Yes") +
                          row(58, 75, 155, "Male", 145, 80, 2) + row(44, 60, 170, "f", 100, 100, 3));
    const auto m = encode_normalize(parse_dataset(in, schema).records, schema);
    const auto& d = m.data();
    REQUIRE(d.rows() == 4);
    REQUIRE(d.cols() == 29);
    const double age[] = {0.0, 1.0, 0.5, 0.25};
    const double weight[] = {0.0, 1.0, 0.5, 0.2};
    const double length[] = {0.0, 0.5, 0.25, 1.0};
    const double sex[] = {1.0, 0.0, 1.0, 0.0};
    const double dm[] = {0.0, 1.0, 0.0, 0.0};
    const double bp[] = {0.0, 1.0, 0.5, 0.0};
    const double pr[] = {0.0, 0.0, 0.5, 1.0};
    const double fc[] = {0.0, 1.0, 1.0 / 3.0, 2.0 / 3.0};
    for (int r = 0; r < 4; ++r) {
        CHECK(d(r, 0) == doctest::Approx(age[r]).epsilon(1e-12));
        CHECK(d(r, 1) == doctest::Approx(weight[r]).epsilon(1e-12));
        CHECK(d(r, 2) == doctest::Approx(length[r]).epsilon(1e-12));
        CHECK(d(r, 3) == sex[r]);
        CHECK(d(r, 4) == dm[r]);
        CHECK(d(r, 5) == 0.0);  // constant "No"
        CHECK(d(r, 15) == doctest::Approx(bp[r]).epsilon(1e-12));
        CHECK(d(r, 16) == doctest::Approx(pr[r]).epsilon(1e-12));
        CHECK(d(r, 24) == doctest::Approx(fc[r]).epsilon(1e-12));
        CHECK(d(r, 28) == 0.0);  // constant "Yes"
    }
    CHECK(m.names().at(26) == "Nonanginal CP");
    std::vector<std::size_t> expect(29);
    std::iota(expect.begin(), expect.end(), 0);
    CHECK(m.active_features() == expect);
}

TEST_CASE("normalization is idempotent through numeric re-ingest") {
    const auto path = std::filesystem::temp_directory_path() / "appt_ingest_idem.csv";
    fixture::write_patients(path, 40, 3);
    const auto schema = FeatureSchema::patient_features();
    const auto m = encode_normalize(load_dataset(path, schema).records, schema);
    std::ostringstream out;
    write_matrix_csv(out, m);
    const auto numeric = FeatureSchema::all_numeric(m.names());
    std::istringstream in(out.str());
    const auto again = encode_normalize(parse_dataset(in, numeric).records, numeric);
    CHECK((again.data() - m.data()).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(again.ids() == m.ids());
    std::filesystem::remove(path);
}

TEST_CASE("row permutation permutes output rows") {
    const auto path = std::filesystem::temp_directory_path() / "appt_ingest_perm.csv";
    fixture::write_patients(path, 25, 11);
    const auto schema = FeatureSchema::patient_features();
    auto records = load_dataset(path, schema).records;
    const auto m = encode_normalize(records, schema);
    std::vector<std::size_t> perm(records.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::mt19937 rng(5);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<PatientRecord> shuffled;
    for (std::size_t p : perm) shuffled.push_back(records[p]);
    const auto ms = encode_normalize(shuffled, schema);
    for (std::size_t r = 0; r < perm.size(); ++r) {
        CHECK(ms.data().row(static_cast<Eigen::Index>(r)) == m.data().row(static_cast<Eigen::Index>(perm[r])));
    }
    std::filesystem::remove(path);
}

TEST_CASE("min_max_normalize keeps values in [0,1]") {
    Eigen::MatrixXd d(3, 2);
    d << -5, 2, 0, 2, 5, 2;
    const auto n = min_max_normalize(d);
    CHECK(n(0, 0) == 0.0);
    CHECK(n(1, 0) == 0.5);
    CHECK(n(2, 0) == 1.0);
    CHECK(n.col(1).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("select_columns keeps schema indices") {
    Eigen::MatrixXd d = Eigen::MatrixXd::Random(3, 4);
    FeatureMatrix m(d, {"a", "b", "c"}, {0, 1, 2, 3}, {"w", "x", "y", "z"});
    const std::vector<std::size_t> cols{3, 1};
    const auto s = m.select_columns(cols);
    CHECK(s.names() == std::vector<std::string>{"z", "x"});
    CHECK(s.active_features() == std::vector<std::size_t>{3, 1});
    CHECK(s.data().col(0) == d.col(3));
}
