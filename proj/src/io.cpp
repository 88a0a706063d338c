#include "tpump/io.hpp"

#include "tpump/model.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tp {

std::string sha256_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) fail(Error::Kind::Io, "cannot read " + p.string());
    EVP_MD_CTX* ctx = EVP_MD_CTX_new();
    EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
    char buf[1 << 15];
    while (in) {
        in.read(buf, sizeof buf);
        if (in.gcount() > 0) EVP_DigestUpdate(ctx, buf, static_cast<size_t>(in.gcount()));
    }
    unsigned char md[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    EVP_DigestFinal_ex(ctx, md, &len);
    EVP_MD_CTX_free(ctx);
    static const char* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string fmt_num(double v) {
    if (v == 0.0) return "0";  // avoid "-0"
    char b[32];
    std::snprintf(b, sizeof b, "%.10g", v);
    return b;
}

void write_text(const std::filesystem::path& p, const std::string& content) {
    std::error_code ec;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary);
    if (!out) fail(Error::Kind::Io, "cannot write " + p.string());
    out << content;
    if (!out) fail(Error::Kind::Io, "write failed for " + p.string());
}

void emit_heatmap(const Eigen::MatrixXd& m, const std::filesystem::path& svg_path, const std::string& title) {
    if (m.rows() == 0 || m.cols() == 0) fail(Error::Kind::InvalidArgument, "heatmap needs a non-empty matrix");
    const double lo = m.minCoeff(), hi = m.maxCoeff();
    const int cell = 12, pad = 24;
    const int w = static_cast<int>(m.cols()) * cell + 2 * pad;
    const int h = static_cast<int>(m.rows()) * cell + 2 * pad;
    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
    if (!title.empty()) s << "<title>" << title << "</title>\n";
    for (int r = 0; r < m.rows(); ++r) {
        for (int c = 0; c < m.cols(); ++c) {
            double x = hi > lo ? (m(r, c) - lo) / (hi - lo) : 0.0;
            int R = static_cast<int>(std::lround(255 + (8 - 255) * x));
            int G = static_cast<int>(std::lround(255 + (48 - 255) * x));
            int B = static_cast<int>(std::lround(255 + (107 - 255) * x));
            char col[8];
            std::snprintf(col, sizeof col, "#%02x%02x%02x", R, G, B);
            s << "<rect x=\"" << pad + c * cell << "\" y=\"" << pad + r * cell << "\" width=\"" << cell
              << "\" height=\"" << cell << "\" fill=\"" << col << "\"/>\n";
        }
    }
    s << "</svg>\n";
    write_text(svg_path, s.str());

    std::ostringstream csv;
    csv << "row,col,value\n";
    for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c) csv << r << ',' << c << ',' << fmt_num(m(r, c)) << '\n';
    auto csv_path = svg_path;
    csv_path.replace_extension(".csv");
    write_text(csv_path, csv.str());
}

}  // namespace tp
