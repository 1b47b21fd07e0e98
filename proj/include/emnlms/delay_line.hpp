#ifndef EMNLMS_DELAY_LINE_HPP
#define EMNLMS_DELAY_LINE_HPP

#include <algorithm>
#include <cstddef>
#include <span>
#include <vector>

#include "emnlms/error.hpp"

namespace emnlms {

/// Regressor window x_n = [x_n, x_{n-1}, ..., x_{n-M+1}] over a sample stream.
///
/// Samples are written twice into a buffer of length 2M so the window is always
/// one contiguous span; push() is O(1). Samples before the first push are zero.
class DelayLine {
public:
    explicit DelayLine(std::size_t taps) : taps_(taps), buf_(2 * taps, 0.0), head_(0) {
        if (taps == 0) throw InvalidArgument("DelayLine: taps must be >= 1");
    }

    void push(double sample) {
        head_ = (head_ == 0 ? taps_ : head_) - 1;
        buf_[head_] = sample;
        buf_[head_ + taps_] = sample;
    }

    std::span<const double> window() const { return {buf_.data() + head_, taps_}; }
    std::size_t size() const { return taps_; }

    void reset() {
        std::fill(buf_.begin(), buf_.end(), 0.0);
        head_ = 0;
    }

private:
    std::size_t taps_;
    std::vector<double> buf_;
    std::size_t head_;
};

}  // namespace emnlms

#endif  // EMNLMS_DELAY_LINE_HPP
