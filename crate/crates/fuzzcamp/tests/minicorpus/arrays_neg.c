/* a[3] */
int main(void) { char *s = "b[0]"; return s == 0; }
