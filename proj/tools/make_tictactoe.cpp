// Regenerates the tic-tac-toe endgame dataset from the rules of the game:
// every board reachable by legal play (x moves first, play stops at the
// first three-in-a-row or a full board), labelled positive when x holds a
// line. The enumeration is exhaustive, so the file is reproducible bit for
// bit and carries no provenance beyond this program.

#include <array>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>

namespace {

using Board = std::array<char, 9>;

constexpr int kLines[8][3] = {{0, 1, 2}, {3, 4, 5}, {6, 7, 8}, {0, 3, 6},
                              {1, 4, 7}, {2, 5, 8}, {0, 4, 8}, {2, 4, 6}};

bool wins(const Board& b, char p) {
    for (const auto& line : kLines)
        if (b[line[0]] == p && b[line[1]] == p && b[line[2]] == p) return true;
    return false;
}

// terminal board -> x-wins flag; std::set keeps the output order fixed
std::set<std::pair<Board, bool>> terminals;

void play(Board& board, int filled, char player) {
    for (int cell = 0; cell < 9; ++cell) {
        if (board[cell] != 'b') continue;
        board[cell] = player;
        if (wins(board, player))
            terminals.insert({board, player == 'x'});
        else if (filled + 1 == 9)
            terminals.insert({board, false});
        else
            play(board, filled + 1, player == 'x' ? 'o' : 'x');
        board[cell] = 'b';
    }
}

const char* kSquareNames[9] = {
    "top-left-square",    "top-middle-square",    "top-right-square",
    "middle-left-square", "middle-middle-square", "middle-right-square",
    "bottom-left-square", "bottom-middle-square", "bottom-right-square"};

}  // namespace

int main(int argc, char** argv) {
    const std::string out_path = argc > 1 ? argv[1] : "tic_tac_toe.arff";

    Board empty;
    empty.fill('b');
    play(empty, 0, 'x');

    std::size_t positive = 0;
    for (const auto& [board, x_wins] : terminals) positive += x_wins ? 1 : 0;
    if (terminals.size() != 958 || positive != 626) {
        std::fprintf(stderr,
                     "enumeration produced %zu boards (%zu positive), "
                     "expected 958 (626)\n",
                     terminals.size(), positive);
        return 1;
    }

    std::ofstream out(out_path, std::ios::binary);
    if (!out) {
        std::fprintf(stderr, "cannot write %s\n", out_path.c_str());
        return 1;
    }
    out << "@relation tic-tac-toe\n\n";
    for (const char* name : kSquareNames)
        out << "@attribute " << name << " {x,o,b}\n";
    out << "@attribute class {positive,negative}\n\n@data\n";
    // positives first, each block in board order, mirroring the usual
    // presentation of this dataset
    for (bool want_positive : {true, false}) {
        for (const auto& [board, x_wins] : terminals) {
            if (x_wins != want_positive) continue;
            for (char square : board) out << square << ',';
            out << (x_wins ? "positive" : "negative") << '\n';
        }
    }
    std::printf("%s: 958 boards, 626 positive, 332 negative\n",
                out_path.c_str());
    return 0;
}
