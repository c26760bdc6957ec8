#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <stdexcept>
#include <vector>

namespace trajformer::data {

enum class Category : int {
  SmallVehicle = 1,
  BigVehicle = 2,
  Pedestrian = 3,
  Cyclist = 4,
  Other = 5,
};

inline constexpr int kCategoryCount = 5;

const char* category_name(Category c);

struct AgentState {
  long agent_id = 0;
  double x = 0.0;
  double y = 0.0;
  double length = 0.0;
  double width = 0.0;
  double heading = 0.0;
  Category category = Category::Other;
};

struct FrameRecords {
  long frame_id = 0;
  std::vector<AgentState> agents;
};

struct ParsedLog {
  std::vector<FrameRecords> frames;  // ascending frame_id
  std::size_t observation_count = 0;
  std::size_t unknown_type_count = 0;
};

class ParseError : public std::runtime_error {
 public:
  ParseError(std::size_t line, const std::string& what);
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Reads the 10-field whitespace format:
///   frame_id object_id object_type x y z length width height heading
/// z and height are dropped. Unknown object types map to Other.
ParsedLog parse_trajectory_stream(std::istream& in);
ParsedLog parse_trajectory_file(const std::filesystem::path& path);

/// Writes frames in the same format with z = height = 0.
void write_trajectory_stream(std::ostream& out, std::span<const FrameRecords> frames);

/// Shortest decimal text that round-trips to the same double.
std::string format_double(double v);

}  // namespace trajformer::data
