#include "tame/drift.hpp"

#include <cmath>
#include <stdexcept>

namespace tame::drift {

void DetectorConfig::validate() const {
    if (alpha < 0.0 || alpha > 1.0) throw std::invalid_argument("alpha must be in [0,1]");
    if (window < 2) throw std::invalid_argument("window must be >= 2");
    const int mf = effective_min_fill();
    if (mf < 2 || mf > window) throw std::invalid_argument("min_fill must be in [2, window]");
}

void SmoothedLoss::update(double raw_loss, double alpha) {
    if (!std::isfinite(raw_loss)) throw std::invalid_argument("loss must be finite");
    if (!value) {
        value = raw_loss;
    } else {
        value = alpha * raw_loss + (1.0 - alpha) * *value;
    }
}

void LossWindow::push(double raw_loss) {
    if (!std::isfinite(raw_loss)) throw std::invalid_argument("loss must be finite");
    values_.push_back(raw_loss);
    if (static_cast<int>(values_.size()) > capacity_) values_.pop_front();
}

std::optional<double> get_threshold(const LossWindow& w, int min_fill) {
    const auto& v = w.values();
    if (static_cast<int>(v.size()) < min_fill) return std::nullopt;
    const double n = static_cast<double>(v.size());
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var /= n;  // population std
    return mean + 3.0 * std::sqrt(var);
}

bool is_deviation(const SmoothedLoss& s, const LossWindow& w, int min_fill) {
    if (!s.ready()) return false;
    const auto th = get_threshold(w, min_fill);
    return th && *s.value > *th;
}

}  // namespace tame::drift
