#pragma once

#include <atomic>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <unistd.h>

#include <Eigen/Dense>

#include "covidx/panel.hpp"

namespace covidx::testing {

/// Scratch directory removed on destruction.
class TempDir {
public:
    TempDir() {
        static std::atomic<int> counter{0};
        path_ = std::filesystem::temp_directory_path() /
                ("covidx_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }
    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

inline void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return buffer.str();
}

inline std::vector<Date> daily(int n, Date start = Date(2020, 2, 24)) {
    std::vector<Date> out;
    for (int i = 0; i < n; ++i) out.push_back(start.plus_days(i));
    return out;
}

inline Panel make_panel(const Eigen::MatrixXd& values, std::vector<std::string> names = {}) {
    Panel p;
    p.dates = daily(int(values.rows()));
    if (names.empty()) {
        for (Eigen::Index j = 0; j < values.cols(); ++j) names.push_back("v" + std::to_string(j + 1));
    }
    p.variables = std::move(names);
    p.values = values;
    return p;
}

inline CleanPanel make_clean(const Eigen::MatrixXd& values, std::vector<std::string> names = {}) {
    const Panel p = make_panel(values, std::move(names));
    CleanPanel c;
    c.dates = p.dates;
    c.variables = p.variables;
    c.values = p.values;
    return c;
}

inline std::vector<double> to_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

} // namespace covidx::testing
