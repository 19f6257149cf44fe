#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace kwass::cli
{
	enum ExitCode : int
	{
		ok = 0,
		input_error = 1,
		numeric_error = 2,
		usage_error = 64,
	};

	/// Runs the `kwass` command line. args[0] is the program name.
	int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);
} // namespace kwass::cli
