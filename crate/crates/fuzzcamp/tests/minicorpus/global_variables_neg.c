typedef int score_t;
struct shell { int v; };
static score_t helper(void);
static score_t helper(void) { return 0; }
int main(void) { return helper(); }
