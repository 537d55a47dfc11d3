#pragma once

#include <condition_variable>
#include <cstddef>
#include <deque>
#include <filesystem>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace wavelab::cli {

std::string sha256_hex(std::string_view data);

/// Round-trippable, locale-independent text for a double.
std::string format_double(double v);

/// CSV text with the provenance header every data file carries.
class CsvTable {
public:
    CsvTable(const std::string& scenario, const std::string& sha256, std::vector<std::string> columns);

    CsvTable& row(const std::vector<std::string>& cells);
    CsvTable& row(const std::vector<double>& cells);
    std::string str() const { return text_; }

private:
    std::size_t columns_;
    std::string text_;
};

/// Files staged under temporary names and renamed into place together on
/// commit(). Anything not committed is removed on destruction.
class OutputSet {
public:
    explicit OutputSet(std::filesystem::path dir);
    ~OutputSet();
    OutputSet(const OutputSet&) = delete;
    OutputSet& operator=(const OutputSet&) = delete;

    /// Thread-safe.
    void stage(const std::string& filename, const std::string& content);
    void commit();

    const std::filesystem::path& dir() const noexcept { return dir_; }
    std::vector<std::string> committed() const;

private:
    std::filesystem::path dir_;
    mutable std::mutex mu_;
    std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged_;
    std::vector<std::string> committed_;
};

/// Single-producer / single-consumer queue with a fixed capacity; push
/// blocks while full, pop blocks while empty and returns nullopt once closed
/// and drained.
template <class T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity) {}

    void push(T item) {
        std::unique_lock lock(mu_);
        not_full_.wait(lock, [&] { return items_.size() < capacity_ || closed_; });
        if (closed_) return;
        items_.push_back(std::move(item));
        not_empty_.notify_one();
    }

    std::optional<T> pop() {
        std::unique_lock lock(mu_);
        not_empty_.wait(lock, [&] { return !items_.empty() || closed_; });
        if (items_.empty()) return std::nullopt;
        T item = std::move(items_.front());
        items_.pop_front();
        not_full_.notify_one();
        return item;
    }

    void close() {
        std::lock_guard lock(mu_);
        closed_ = true;
        not_empty_.notify_all();
        not_full_.notify_all();
    }

private:
    std::size_t capacity_;
    std::deque<T> items_;
    bool closed_ = false;
    std::mutex mu_;
    std::condition_variable not_full_, not_empty_;
};

}  // namespace wavelab::cli
