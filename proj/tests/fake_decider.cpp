// Line-delimited JSON decider used by the tests: answers outside_N when the
// input has an odd number of ones.
#include <algorithm>
#include <iostream>
#include <string>

#include <json.hpp>

int main() {
  std::string line;
  while (std::getline(std::cin, line)) {
    const auto req = nlohmann::json::parse(line);
    const auto bits = req.at("input").get<std::string>();
    const bool odd = std::count(bits.begin(), bits.end(), '1') % 2 == 1;
    std::cout << nlohmann::json{{"verdict", odd ? "outside_N" : "outside_Y"}}.dump() << std::endl;
  }
}
