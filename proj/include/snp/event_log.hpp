#pragma once

#include <filesystem>

#include "snp/events.hpp"

namespace snp {

/// Append-only JSON Lines writer. Each append is one write(2) of a full line,
/// followed by fsync when `durable` is set.
class EventLogWriter {
 public:
  EventLogWriter(const std::filesystem::path& path, bool durable = true);
  ~EventLogWriter();

  EventLogWriter(const EventLogWriter&) = delete;
  EventLogWriter& operator=(const EventLogWriter&) = delete;
  EventLogWriter(EventLogWriter&& other) noexcept;
  EventLogWriter& operator=(EventLogWriter&& other) noexcept;

  void append(const EventRecord& record);

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  int fd_ = -1;
  bool durable_ = true;
};

}  // namespace snp
