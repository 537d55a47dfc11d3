#include "output.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include <openssl/evp.h>

#include "wavelab/core.hpp"

namespace wavelab::cli {

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw IoError("SHA-256 computation failed");
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xf]);
    }
    return out;
}

std::string format_double(double v) {
    if (v == 0.0) return "0";  // folds -0 as well
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable::CsvTable(const std::string& scenario, const std::string& sha256, std::vector<std::string> columns)
    : columns_(columns.size()) {
    text_ = "# scenario: " + scenario + "\n# scenario_sha256: " + sha256 + "\n";
    row(columns);
}

CsvTable& CsvTable::row(const std::vector<std::string>& cells) {
    if (cells.size() != columns_) throw IoError("CSV row has the wrong number of cells");
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) text_ += ',';
        text_ += cells[i];
    }
    text_ += '\n';
    return *this;
}

CsvTable& CsvTable::row(const std::vector<double>& cells) {
    std::vector<std::string> s;
    s.reserve(cells.size());
    for (double v : cells) s.push_back(format_double(v));
    return row(s);
}

OutputSet::OutputSet(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec || !std::filesystem::is_directory(dir_))
        throw IoError("cannot create output directory " + dir_.string());
}

OutputSet::~OutputSet() {
    for (const auto& [tmp, final_path] : staged_) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
    }
}

void OutputSet::stage(const std::string& filename, const std::string& content) {
    const auto final_path = dir_ / filename;
    const auto tmp = dir_ / ("." + filename + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) throw IoError("short write to " + tmp.string());
    }
    std::lock_guard lock(mu_);
    staged_.emplace_back(tmp, final_path);
}

void OutputSet::commit() {
    std::lock_guard lock(mu_);
    for (const auto& [tmp, final_path] : staged_) {
        std::error_code ec;
        std::filesystem::rename(tmp, final_path, ec);
        if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
        committed_.push_back(final_path.filename().string());
    }
    staged_.clear();
}

std::vector<std::string> OutputSet::committed() const {
    std::lock_guard lock(mu_);
    return committed_;
}

}  // namespace wavelab::cli
