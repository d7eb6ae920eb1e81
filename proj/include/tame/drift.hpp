#pragma once

#include <deque>
#include <optional>

namespace tame::drift {

struct DetectorConfig {
    double alpha = 0.2;   // smoothing factor in [0,1]
    int window = 100;     // W_th, sliding window of raw batch losses
    int min_fill = 0;     // detection warm-up; 0 means "full window"

    int effective_min_fill() const { return min_fill > 0 ? min_fill : window; }
    void validate() const;
};

// EWMA of the loss signal. Absent until the first observation, then
// value = alpha * l + (1 - alpha) * value.
struct SmoothedLoss {
    std::optional<double> value;

    void update(double raw_loss, double alpha);
    bool ready() const { return value.has_value(); }
};

// FIFO of the most recent raw batch losses, capped at W_th.
struct LossWindow {
    explicit LossWindow(int capacity = 100) : capacity_(capacity) {}

    void push(double raw_loss);
    int size() const { return static_cast<int>(values_.size()); }
    int capacity() const { return capacity_; }
    const std::deque<double>& values() const { return values_; }

private:
    int capacity_;
    std::deque<double> values_;
};

// mean + 3 * population std over the window, or nullopt while the window
// holds fewer than min_fill values (detection suppressed during warm-up).
std::optional<double> get_threshold(const LossWindow& w, int min_fill);

// True iff the window is ready and the smoothed loss exceeds its threshold.
bool is_deviation(const SmoothedLoss& s, const LossWindow& w, int min_fill);

}  // namespace tame::drift
