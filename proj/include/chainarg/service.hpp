#pragma once

#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "chainarg/case_file.hpp"
#include "chainarg/error.hpp"
#include "chainarg/evaluation.hpp"

namespace chainarg {

// Raised when a case's writer lock is not acquired in time; maps to 503.
class BusyError : public Error {
 public:
  using Error::Error;
};

// One `<case_id>.case.json` per case in a directory. Writers to the same case are
// serialized; readers get the last committed snapshot without blocking.
class CaseStore {
 public:
  explicit CaseStore(std::filesystem::path dir,
                     std::chrono::milliseconds write_timeout = std::chrono::milliseconds(2000));

  const std::filesystem::path& dir() const { return dir_; }

  std::vector<std::string> list() const;
  // NotFoundError when there is no such case file.
  std::shared_ptr<const CaseFile> get(const std::string& case_id);
  // IntegrityError when the id is taken or not usable as a file name.
  std::shared_ptr<const CaseFile> create(CaseFile c);
  // Applies `fn` to a copy, writes it to disk, then publishes it.
  std::shared_ptr<const CaseFile> mutate(const std::string& case_id, const std::function<void(CaseFile&)>& fn);
  // Grounded evaluation of the current snapshot, cached per revision.
  std::shared_ptr<const Evaluation> evaluation(const std::string& case_id);

  std::filesystem::path path_of(const std::string& case_id) const;

 private:
  struct Slot {
    std::timed_mutex writer;
    std::mutex guard;  // protects the two pointers below
    std::shared_ptr<const CaseFile> snapshot;
    std::shared_ptr<const Evaluation> evaluation;
    std::optional<std::uint64_t> evaluated_revision;
  };

  std::shared_ptr<Slot> slot(const std::string& case_id);

  std::filesystem::path dir_;
  std::chrono::milliseconds write_timeout_;
  std::mutex slots_mu_;
  std::map<std::string, std::shared_ptr<Slot>> slots_;
};

// File names are `<id>.case.json`; ids are limited to [A-Za-z0-9][A-Za-z0-9_.-]*.
bool valid_case_id(std::string_view id);

struct ServiceOptions {
  std::filesystem::path case_dir;
  std::optional<std::filesystem::path> ui_dir;
  std::chrono::milliseconds write_timeout{2000};
};

class Service {
 public:
  explicit Service(ServiceOptions options);
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  CaseStore& store();

  // Error when the port cannot be bound.
  void bind(const std::string& host, int port);
  // Binds an ephemeral port and returns it.
  int bind_any_port(const std::string& host);
  // Blocks until stop().
  void serve();
  // For callers running serve() on another thread.
  void wait_until_ready() const;
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace chainarg
