#include "crowdseg/pdf.hpp"

#include <cmath>
#include <sstream>

namespace crowdseg {

bool DiscretePdf::valid(double tol) const {
    if (bins < 1 || static_cast<int>(p.size()) != bins) return false;
    double sum = 0.0;
    for (double v : p) {
        if (!(v >= 0.0) || !std::isfinite(v)) return false;
        sum += v;
    }
    return std::abs(sum - 1.0) <= tol;
}

int discretize_bin(double s, int b) {
    if (!(s >= 0.0 && s <= 1.0)) {
        std::ostringstream os;
        os << "discretize: score " << s << " outside [0,1]";
        throw DataError(os.str());
    }
    if (b < 2) throw DataError("discretize: need at least 2 bins");
    int m = static_cast<int>(std::ceil(s * b));
    if (m < 1) m = 1;
    if (m > b) m = b;
    return m;
}

DiscretePdf discretize(double s, int b) {
    DiscretePdf pdf(b);
    pdf.at_label(discretize_bin(s, b)) = 1.0;
    return pdf;
}

DiscretePdf mix(const DiscretePdf& hg, const DiscretePdf& ha, double alpha) {
    if (hg.bins != ha.bins) throw DataError("mix: bin-count mismatch");
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw DataError("mix: alpha outside [0,1]");
    DiscretePdf out(hg.bins);
    for (int i = 0; i < hg.bins; ++i) out.p[i] = alpha * hg.p[i] + (1.0 - alpha) * ha.p[i];
    return out;
}

double unary_potential(const DiscretePdf& h, int label, double eps_log) {
    if (label < 1 || label > h.bins) throw DataError("unary_potential: label out of range");
    return -std::log(std::max(h.at_label(label), eps_log));
}

double label_to_score(int m, int b) {
    if (m < 1 || m > b) {
        std::ostringstream os;
        os << "label_to_score: label " << m << " out of range [1," << b << "]";
        throw DataError(os.str());
    }
    return (static_cast<double>(m) - 0.5) / b;
}

}  // namespace crowdseg
