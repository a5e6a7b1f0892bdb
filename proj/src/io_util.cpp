#include "sera/io_util.hpp"

#include <cstdio>
#include <fstream>
#include <system_error>

#include "sera/errors.hpp"

namespace sera {

std::string fmt_g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path tmp = path.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ParseError("cannot open for writing: " + tmp.string());
        out << content;
        if (!out) throw ParseError("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw ParseError("rename failed for " + path.string() + ": " + ec.message());
}

void write_curve_csv(const std::filesystem::path& path, const SeraCurve& curve) {
    std::string out = "t,ser\n";
    for (std::size_t i = 0; i < curve.cutoffs.size(); ++i)
        out += fmt_g17(curve.cutoffs[i]) + "," + fmt_g17(curve.ser[i]) + "\n";
    atomic_write_file(path, out);
}

void write_predictions_csv(const std::filesystem::path& path,
                           std::span<const std::size_t> row_ids,
                           std::span<const double> y, std::span<const double> y_hat) {
    std::string out = "row_id,y,yhat\n";
    for (std::size_t i = 0; i < y.size(); ++i)
        out += std::to_string(row_ids[i]) + "," + fmt_g17(y[i]) + "," +
               fmt_g17(y_hat[i]) + "\n";
    atomic_write_file(path, out);
}

void write_relevance_csv(const std::filesystem::path& path,
                         std::span<const double> ys, std::span<const double> phis) {
    std::string out = "y,phi\n";
    for (std::size_t i = 0; i < ys.size(); ++i)
        out += fmt_g17(ys[i]) + "," + fmt_g17(phis[i]) + "\n";
    atomic_write_file(path, out);
}

} // namespace sera
