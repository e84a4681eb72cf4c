#pragma once

// Synthetic patient files over the 29-column schema. Two latent groups differ
// in age, blood pressure and a handful of symptoms so clustering has
// something to find.

#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

namespace fixture {

inline const std::vector<std::string>& header() {
    static const std::vector<std::string> h = {
        "Age", "Weight", "Length", "Sex", "DM", "HTN", "Current smoker", "Ex-smoker", "FH", "CRF",
        "CVA", "Airway disease", "Thyroid Disease", "CHF", "DLP", "BP", "PR", "Edema",
        "Weak peripheral pulse", "Lung rales", "Systolic murmur", "Diastolic murmur", "Typical Chest Pain",
        "Dyspnea", "Function class", "Atypical", "Nonanginal", "Exertional CP", "Low Th Ang"};
    return h;
}

inline void write_patients(const std::filesystem::path& path, int rows, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::ofstream out(path);
    const auto& h = header();
    for (std::size_t c = 0; c < h.size(); ++c) out << (c ? "," : "") << h[c];
    out << '\n';
    const auto yn = [&](double p) { return u(rng) < p ? "Yes" : "N"; };
    for (int r = 0; r < rows; ++r) {
        const bool sick = u(rng) < 0.7;
        const int age = sick ? 55 + static_cast<int>(u(rng) * 25) : 32 + static_cast<int>(u(rng) * 20);
        out << age << ',' << 50 + static_cast<int>(u(rng) * 60) << ',' << 150 + static_cast<int>(u(rng) * 35) << ','
            << (u(rng) < 0.55 ? "Male" : "Fmale");
        for (int k = 0; k < 11; ++k) out << ',' << yn(sick ? 0.6 : 0.1);
        out << ',' << (sick ? 140 + static_cast<int>(u(rng) * 45) : 95 + static_cast<int>(u(rng) * 30)) << ','
            << 60 + static_cast<int>(u(rng) * 40);
        for (int k = 0; k < 7; ++k) out << ',' << yn(sick ? 0.7 : 0.05);
        out << ',' << (sick ? 3 + static_cast<int>(u(rng) * 2) : 1);
        for (int k = 0; k < 4; ++k) out << ',' << yn(sick ? 0.5 : 0.1);
        out << '\n';
    }
}

}  // namespace fixture
